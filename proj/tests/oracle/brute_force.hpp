#pragma once

// Brute-force reference for history probabilities. Shares nothing with the
// library beyond Eigen: the Hamiltonian is assembled from Pauli Kronecker
// products on the full 2^N space and every quantity is computed with dense
// density matrices.

#include <map>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Mat = Eigen::MatrixXcd;

struct Params {
  int n = 1;
  double J = 1.0;
  double delta = 1.0;
  double beta = 0.5;
  double e_min = -1.2;
  double e_max = 0.6;
};

struct System {
  int spins = 0;
  Mat h0;
  Mat h;
  // Event projectors on the full space, restricted to total Sz = 0. Key
  // INT32_MIN is the complement within that sector.
  std::map<int, Mat> events;
  Eigen::VectorXd h_values;
  Mat h_vectors;
  double window_margin = 0.0;  // distance of the closest H0 level to a window edge
};

System build(const Params& p);

Mat propagator(const System& s, double tau);

// Slot label, or `gap` for an unmeasured slot.
struct Step {
  bool measured;
  int label;
};

// tr{Pi_n U ... U Pi_1 rho}, rho = sum_l w_l pi_l, by conjugating rho.
double probability(const System& s, const std::vector<Step>& steps, double tau,
                   const std::map<int, double>& weights);

// Same value from the decoherence functional: every gap is expanded into all
// event labels and sum_{a, b} tr{C_a rho C_b^dag} is taken over all pairs of
// branch strings.
double probability_by_enumeration(const System& s, const std::vector<Step>& steps, double tau,
                                  const std::map<int, double>& weights);

// P(x1, --, x3) - sum_x2 P(x1, x2, x3).
double interference(const System& s, int x1, int x3, double tau, const std::map<int, double>& weights);

}  // namespace oracle
