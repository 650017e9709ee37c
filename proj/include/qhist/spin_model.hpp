#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "qhist/linear_operator.hpp"

namespace qhist {

// Two spin-1/2 ladders of n rungs each (N = 4n spins), coupled along their
// inner legs. Energies in units of J, hbar = 1.
struct ModelParams {
  int n = 3;
  double J = 1.0;
  double delta = 1.0;
  double beta = 0.5;
  double e_min = -1.2;  // window bounds, in units of J
  double e_max = 0.6;
  double total_sz = 0.0;

  int num_spins() const { return 4 * n; }
  void validate() const;
};

void to_json(nlohmann::json& j, const ModelParams& p);
void from_json(const nlohmann::json& j, ModelParams& p);
ModelParams load_model_params(const std::string& path);

// Computational basis of one total-S^z sector. Bit i of a state word is
// site i+1, set bit = spin up. States are in increasing numeric order, which
// for fixed popcount coincides with the combinatorial number system, so the
// ordinal of a state is computed rather than looked up.
class SectorBasis {
 public:
  SectorBasis(int num_spins, double total_sz);

  int num_spins() const { return num_spins_; }
  double total_sz() const { return total_sz_; }
  int up_count() const { return up_; }
  long dim() const { return static_cast<long>(states_.size()); }
  const std::vector<std::uint32_t>& states() const { return states_; }
  std::uint32_t state(long index) const { return states_[static_cast<std::size_t>(index)]; }

  // Ordinal of a configuration; -1 if it is not in the sector.
  long index_of(std::uint32_t state) const;

 private:
  int num_spins_;
  double total_sz_;
  int up_;
  std::vector<std::uint32_t> states_;
  std::vector<std::vector<long>> binom_;
};

SectorBasis build_basis(int num_spins, double total_sz);

// Sites are 1-based here, matching configuration files.
struct Bond {
  int a = 0;
  int b = 0;
  double strength = 0.0;
};

struct BondList {
  std::vector<Bond> bonds;
  void validate(int num_spins) const;
};

struct LadderBonds {
  BondList intra;
  BondList inter;
};

LadderBonds ladder_bonds(const ModelParams& params);

// Sum over bonds of c (sx sx + sy sy + delta sz sz), restricted to the sector.
LinearOperator hamiltonian_from_bonds(const SectorBasis& basis, const BondList& bonds,
                                      double delta);

LinearOperator build_hamiltonian(const ModelParams& params, const SectorBasis& basis,
                                 bool include_interaction);

// Magnetization of the left ladder (sites 1..2n) minus that of the right.
LinearOperator build_observable_X(const SectorBasis& basis, int n);

// Total S^z on the sector: a multiple of the identity.
LinearOperator total_sz_operator(const SectorBasis& basis);

}  // namespace qhist
