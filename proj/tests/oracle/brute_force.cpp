#include "brute_force.hpp"

#include <climits>
#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

namespace oracle {

namespace {

using C = std::complex<double>;

Mat pauli(char which) {
  Mat m = Mat::Zero(2, 2);
  switch (which) {
    case 'x':
      m(0, 1) = m(1, 0) = 1.0;
      break;
    case 'y':
      m(0, 1) = C(0, -1);
      m(1, 0) = C(0, 1);
      break;
    case 'z':
      // basis |down> = 0, |up> = 1, matching bit = 1 for up
      m(0, 0) = -1.0;
      m(1, 1) = 1.0;
      break;
    default:
      m = Mat::Identity(2, 2);
  }
  return m;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Spin operator s^a on site `site` (1-based); site 1 is the least significant bit.
Mat spin(char a, int site, int spins) {
  Mat out = Mat::Identity(1, 1);
  for (int k = spins; k >= 1; --k) out = kron(out, k == site ? Mat(0.5 * pauli(a)) : pauli('1'));
  return out;
}

Mat bond(int a, int b, double c, double delta, int spins) {
  return c * (spin('x', a, spins) * spin('x', b, spins) + spin('y', a, spins) * spin('y', b, spins) +
              delta * spin('z', a, spins) * spin('z', b, spins));
}

}  // namespace

System build(const Params& p) {
  System s;
  const int n = p.n;
  const int N = 4 * n;
  s.spins = N;
  const long d = 1L << N;
  s.h0 = Mat::Zero(d, d);
  for (int off : {0, 2 * n}) {
    for (int leg : {0, n})
      for (int i = 1; i < n; ++i) s.h0 += bond(off + leg + i, off + leg + i + 1, p.J, p.delta, N);
    for (int i = 1; i <= n; ++i) s.h0 += bond(off + i, off + i + n, p.J, p.delta, N);
  }
  s.h = s.h0;
  for (int i = n + 1; i <= 2 * n; ++i) s.h += bond(i, i + n, p.J * p.beta, p.delta, N);

  Mat sz = Mat::Zero(d, d), x = Mat::Zero(d, d);
  for (int i = 1; i <= N; ++i) {
    const Mat z = spin('z', i, N);
    sz += z;
    x += (i <= 2 * n ? 1.0 : -1.0) * z;
  }

  Eigen::SelfAdjointEigenSolver<Mat> e0(s.h0);
  Mat pe = Mat::Zero(d, d);
  s.window_margin = 1e300;
  for (long k = 0; k < d; ++k) {
    const double e = e0.eigenvalues()(k);
    s.window_margin = std::min({s.window_margin, std::abs(e - p.e_min * p.J), std::abs(e - p.e_max * p.J)});
    if (e >= p.e_min * p.J - 1e-12 && e <= p.e_max * p.J + 1e-12) {
      pe += e0.eigenvectors().col(k) * e0.eigenvectors().col(k).adjoint();
    }
  }
  Mat sector = Mat::Zero(d, d);
  for (long k = 0; k < d; ++k)
    if (std::abs(sz(k, k).real()) < 1e-9) sector(k, k) = 1.0;
  Mat rest = sector;
  for (int xv = -2 * n; xv <= 2 * n; xv += 2) {
    Mat px = Mat::Zero(d, d);
    for (long k = 0; k < d; ++k)
      if (sector(k, k).real() > 0.5 && std::abs(x(k, k).real() - xv) < 1e-9) px(k, k) = 1.0;
    const Mat pxe = pe * px * pe;
    s.events[xv] = pxe;
    rest -= pxe;
  }
  s.events[INT_MIN] = rest;

  Eigen::SelfAdjointEigenSolver<Mat> e(s.h);
  s.h_values = e.eigenvalues();
  s.h_vectors = e.eigenvectors();
  return s;
}

Mat propagator(const System& s, double tau) {
  Eigen::VectorXcd ph(s.h_values.size());
  for (long k = 0; k < ph.size(); ++k) ph(k) = std::exp(C(0, -s.h_values(k) * tau));
  return s.h_vectors * ph.asDiagonal() * s.h_vectors.adjoint();
}

namespace {

Mat initial(const System& s, const std::map<int, double>& weights) {
  const long d = s.h.rows();
  Mat rho = Mat::Zero(d, d);
  for (const auto& [l, w] : weights) rho += w * s.events.at(l);
  return rho;
}

}  // namespace

double probability(const System& s, const std::vector<Step>& steps, double tau,
                   const std::map<int, double>& weights) {
  const Mat u = propagator(s, tau);
  Mat rho = initial(s, weights);
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (k > 0) rho = u * rho * u.adjoint();
    if (steps[k].measured) {
      const Mat& p = s.events.at(steps[k].label);
      rho = p * rho * p;
    }
  }
  return rho.trace().real();
}

double probability_by_enumeration(const System& s, const std::vector<Step>& steps, double tau,
                                  const std::map<int, double>& weights) {
  const Mat u = propagator(s, tau);
  const long d = s.h.rows();
  // Class operators C = P_n U ... U P_1 for every assignment of labels to gaps.
  std::vector<Mat> chains{Mat::Identity(d, d)};
  for (std::size_t k = 0; k < steps.size(); ++k) {
    std::vector<Mat> next;
    for (const Mat& c : chains) {
      const Mat base = k > 0 ? Mat(u * c) : c;
      if (steps[k].measured) {
        next.push_back(s.events.at(steps[k].label) * base);
      } else {
        for (const auto& [l, p] : s.events) next.push_back(p * base);
      }
    }
    chains = std::move(next);
  }
  const Mat rho = initial(s, weights);
  C total = 0.0;
  for (const Mat& a : chains)
    for (const Mat& b : chains) total += (a * rho * b.adjoint()).trace();
  return total.real();
}

double interference(const System& s, int x1, int x3, double tau, const std::map<int, double>& weights) {
  double gap = probability(s, {{true, x1}, {false, 0}, {true, x3}}, tau, weights);
  for (const auto& [l, p] : s.events) gap -= probability(s, {{true, x1}, {true, l}, {true, x3}}, tau, weights);
  return gap;
}

}  // namespace oracle
