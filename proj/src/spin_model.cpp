#include "qhist/spin_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <set>
#include <utility>

namespace qhist {

void ModelParams::validate() const {
  if (n < 1) fail(ErrorKind::InvalidInput, "n must be >= 1");
  if (!(J > 0.0) || !std::isfinite(J)) fail(ErrorKind::InvalidInput, "J must be finite and > 0");
  if (!std::isfinite(delta)) fail(ErrorKind::InvalidInput, "delta must be finite");
  if (!(beta >= 0.0) || !std::isfinite(beta)) fail(ErrorKind::InvalidInput, "beta must be >= 0");
  if (!(e_min < e_max)) fail(ErrorKind::InvalidInput, "energy window requires e_min < e_max");
  const double twice = 2.0 * total_sz;
  if (std::abs(twice - std::round(twice)) > 1e-12) {
    fail(ErrorKind::InvalidInput, "total_sz must be a multiple of 1/2");
  }
}

void to_json(nlohmann::json& j, const ModelParams& p) {
  j = nlohmann::json{{"n", p.n},
                     {"J", p.J},
                     {"delta", p.delta},
                     {"beta", p.beta},
                     {"energy_window", {p.e_min, p.e_max}},
                     {"total_sz", p.total_sz}};
}

void from_json(const nlohmann::json& j, ModelParams& p) {
  ModelParams d;
  if (j.contains("n")) {
    d.n = j.at("n").get<int>();
  } else if (j.contains("N")) {
    const int spins = j.at("N").get<int>();
    if (spins % 4 != 0) fail(ErrorKind::InvalidInput, "N must be a multiple of 4");
    d.n = spins / 4;
  }
  d.J = j.value("J", d.J);
  d.delta = j.value("delta", d.delta);
  d.beta = j.value("beta", d.beta);
  if (j.contains("energy_window")) {
    const auto& w = j.at("energy_window");
    d.e_min = w.at(0).get<double>();
    d.e_max = w.at(1).get<double>();
  }
  d.total_sz = j.value("total_sz", d.total_sz);
  p = d;
}

ModelParams load_model_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidInput, "cannot open " + path);
  nlohmann::json j;
  in >> j;
  ModelParams p = j.contains("model") ? j.at("model").get<ModelParams>() : j.get<ModelParams>();
  p.validate();
  return p;
}

SectorBasis::SectorBasis(int num_spins, double total_sz)
    : num_spins_(num_spins), total_sz_(total_sz), up_(0) {
  if (num_spins <= 0 || num_spins > 24) {
    fail(ErrorKind::InvalidInput, "num_spins must be in [1, 24]");
  }
  const double up = num_spins / 2.0 + total_sz;
  if (std::abs(up - std::round(up)) > 1e-12) {
    fail(ErrorKind::InvalidInput, "impossible sector: N/2 + total_sz is not an integer");
  }
  if (up < -1e-12 || up > num_spins + 1e-12) {
    fail(ErrorKind::InvalidInput, "impossible sector: |total_sz| > N/2");
  }
  up_ = static_cast<int>(std::lround(up));

  binom_.assign(num_spins + 1, std::vector<long>(num_spins + 2, 0));
  for (int m = 0; m <= num_spins; ++m) {
    binom_[m][0] = 1;
    for (int k = 1; k <= m; ++k) binom_[m][k] = binom_[m - 1][k - 1] + (k <= m - 1 ? binom_[m - 1][k] : 0);
  }

  states_.reserve(static_cast<std::size_t>(binom_[num_spins][up_]));
  if (up_ == 0) {
    states_.push_back(0u);
    return;
  }
  // Gosper's hack: next larger word with the same popcount.
  std::uint64_t v = (std::uint64_t{1} << up_) - 1;
  const std::uint64_t limit = std::uint64_t{1} << num_spins;
  while (v < limit) {
    states_.push_back(static_cast<std::uint32_t>(v));
    const std::uint64_t t = v | (v - 1);
    v = (t + 1) | (((~t & (t + 1)) - 1) >> (std::countr_zero(v) + 1));
  }
}

long SectorBasis::index_of(std::uint32_t state) const {
  if (num_spins_ < 32 && (state >> num_spins_) != 0) return -1;
  if (std::popcount(state) != up_) return -1;
  long rank = 0;
  int k = 0;
  for (int pos = 0; pos < num_spins_; ++pos) {
    if ((state >> pos) & 1u) {
      ++k;
      rank += binom_[pos][k];
    }
  }
  return rank;
}

SectorBasis build_basis(int num_spins, double total_sz) { return SectorBasis(num_spins, total_sz); }

void BondList::validate(int num_spins) const {
  std::set<std::pair<int, int>> seen;
  for (const Bond& b : bonds) {
    if (b.a < 1 || b.a > num_spins || b.b < 1 || b.b > num_spins || b.a == b.b) {
      fail(ErrorKind::InvalidInput, "bond references an invalid site");
    }
    if (!std::isfinite(b.strength)) fail(ErrorKind::InvalidInput, "bond strength not finite");
    const auto key = std::minmax(b.a, b.b);
    if (!seen.insert(key).second) fail(ErrorKind::InvalidInput, "duplicate bond");
  }
}

LadderBonds ladder_bonds(const ModelParams& params) {
  params.validate();
  const int n = params.n;
  LadderBonds out;
  for (int offset : {0, 2 * n}) {
    for (int leg_start : {1, n + 1}) {
      for (int i = leg_start; i < leg_start + n - 1; ++i) {
        out.intra.bonds.push_back({i + offset, i + 1 + offset, params.J});
      }
    }
    for (int i = 1; i <= n; ++i) out.intra.bonds.push_back({i + offset, i + n + offset, params.J});
  }
  for (int i = n + 1; i <= 2 * n; ++i) {
    out.inter.bonds.push_back({i, i + n, params.J * params.beta});
  }
  return out;
}

LinearOperator hamiltonian_from_bonds(const SectorBasis& basis, const BondList& bonds,
                                      double delta) {
  bonds.validate(basis.num_spins());
  const long dim = basis.dim();
  CsrMatrix h;
  h.dim = dim;
  h.row_ptr.reserve(static_cast<std::size_t>(dim) + 1);
  h.row_ptr.push_back(0);
  std::vector<std::pair<int, double>> row;
  for (long r = 0; r < dim; ++r) {
    const std::uint32_t s = basis.state(r);
    double diag = 0.0;
    row.clear();
    for (const Bond& b : bonds.bonds) {
      const int ia = b.a - 1;
      const int ib = b.b - 1;
      const bool up_a = (s >> ia) & 1u;
      const bool up_b = (s >> ib) & 1u;
      diag += b.strength * delta * (up_a == up_b ? 0.25 : -0.25);
      if (up_a != up_b && b.strength != 0.0) {
        const std::uint32_t flipped = s ^ ((1u << ia) | (1u << ib));
        row.emplace_back(static_cast<int>(basis.index_of(flipped)), 0.5 * b.strength);
      }
    }
    row.emplace_back(static_cast<int>(r), diag);
    std::sort(row.begin(), row.end());
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (!h.cols.empty() && static_cast<long>(h.cols.size()) > h.row_ptr.back() &&
          h.cols.back() == row[k].first) {
        h.vals.back() += row[k].second;
      } else {
        h.cols.push_back(row[k].first);
        h.vals.emplace_back(row[k].second, 0.0);
      }
    }
    h.row_ptr.push_back(static_cast<long>(h.cols.size()));
  }
  return LinearOperator::sparse(std::move(h), OperatorTag::Hermitian);
}

LinearOperator build_hamiltonian(const ModelParams& params, const SectorBasis& basis,
                                 bool include_interaction) {
  params.validate();
  if (basis.num_spins() != params.num_spins()) {
    fail(ErrorKind::InvalidInput, "basis has " + std::to_string(basis.num_spins()) +
                                      " spins but params describe N = " +
                                      std::to_string(params.num_spins()));
  }
  const LadderBonds lb = ladder_bonds(params);
  BondList all = lb.intra;
  if (include_interaction) {
    all.bonds.insert(all.bonds.end(), lb.inter.bonds.begin(), lb.inter.bonds.end());
  }
  return hamiltonian_from_bonds(basis, all, params.delta);
}

LinearOperator build_observable_X(const SectorBasis& basis, int n) {
  if (basis.num_spins() != 4 * n) fail(ErrorKind::InvalidInput, "basis.num_spins must equal 4n");
  const std::uint32_t left_mask = (1u << (2 * n)) - 1u;
  CVector d(basis.dim());
  for (long r = 0; r < basis.dim(); ++r) {
    const std::uint32_t s = basis.state(r);
    const int up_left = std::popcount(s & left_mask);
    const int up_right = std::popcount(s & ~left_mask);
    // sum of s^z over 2n sites = up - n
    d(r) = Complex(static_cast<double>((up_left - n) - (up_right - n)), 0.0);
  }
  return LinearOperator::diagonal(std::move(d), OperatorTag::Hermitian);
}

LinearOperator total_sz_operator(const SectorBasis& basis) {
  CVector d(basis.dim());
  for (long r = 0; r < basis.dim(); ++r) {
    d(r) = Complex(std::popcount(basis.state(r)) - basis.num_spins() / 2.0, 0.0);
  }
  return LinearOperator::diagonal(std::move(d), OperatorTag::Hermitian);
}

}  // namespace qhist
