#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "qwot/embedding.hpp"
#include "qwot/matrix.hpp"
#include "qwot/state.hpp"

namespace qwot {

struct SolverOptions {
  double tol = 1e-9;          // primal residual, dual residual and relative gap
  long max_iters = 200000;
  double over_relax = 1.6;    // in (0,2)
  double penalty = 0.0;       // 0 = auto-scale from ||C||_F
  int anderson_memory = 10;   // fixed-point acceleration window; 0 = plain iteration
  long trace_every = 0;       // > 0: dump residuals to stderr every so many iterations

  // Optional warm start from a previous solution.
  std::optional<ComplexMatrix> init_coupling;
  std::optional<ComplexMatrix> init_y1;
  std::optional<ComplexMatrix> init_y2;
};

/// min Tr(C X) over bipartite PSD X with Tr_2 X = marginal_1, Tr_1 X = marginal_2.
struct SdpProblem {
  ComplexMatrix cost;        // Hermitian, dim d^2
  DensityMatrix marginal_1;  // target of Tr_2
  DensityMatrix marginal_2;  // target of Tr_1
};

struct Coupling {
  DensityMatrix mat;                      // dim d^2
  double residual_1 = 0, residual_2 = 0;  // Frobenius norms of marginal violations
};

/// Solver output. When a marginal is rank deficient the problem is first
/// restricted to the support face (any feasible coupling vanishes outside
/// supp(marginal_1) (x) supp(marginal_2)); `y1`/`y2` then certify the reduced
/// problem in the face basis, and `dual_bound` is the corresponding valid
/// lower bound on the original optimum.
struct SdpSolution {
  Coupling coupling;
  double primal_value = 0;
  double dual_bound = 0;
  long iterations = 0;
  bool converged = false;

  // Convergence diagnostics and the dual certificate behind dual_bound.
  double primal_residual = 0;
  double dual_residual = 0;
  double rel_gap = 0;
  double min_slack_eig = 0;  // most negative slack eigenvalue before the repair shift
  ComplexMatrix y1;
  ComplexMatrix y2;
  bool face_reduced = false;
  std::vector<std::vector<cplx>> face_basis_1;  // kept support columns (length d each)
  std::vector<std::vector<cplx>> face_basis_2;
};

namespace detail {

// Partial traces for a bipartite operator on C^{d1} (x) C^{d2}.
inline ComplexMatrix ptrace_keep1(const ComplexMatrix& x, int d1, int d2) {
  ComplexMatrix r(d1);
  for (int i = 0; i < d1; ++i)
    for (int j = 0; j < d1; ++j) {
      cplx s{};
      for (int k = 0; k < d2; ++k) s += x(i * d2 + k, j * d2 + k);
      r(i, j) = s;
    }
  return r;
}

inline ComplexMatrix ptrace_keep2(const ComplexMatrix& x, int d1, int d2) {
  ComplexMatrix r(d2);
  for (int k = 0; k < d2; ++k)
    for (int l = 0; l < d2; ++l) {
      cplx s{};
      for (int i = 0; i < d1; ++i) s += x(i * d2 + k, i * d2 + l);
      r(k, l) = s;
    }
  return r;
}

struct MarginalProjection {
  ComplexMatrix x;
  ComplexMatrix lambda1;
  ComplexMatrix lambda2;
};

// Frobenius-nearest Hermitian matrix with Tr_2 X = a, Tr_1 X = b on
// C^{d1} (x) C^{d2}. The normal equations of the constraint map solve in
// closed form after gauge-fixing the shared-trace redundancy:
//   X = W + L1 (x) 1 + 1 (x) L2,
//   L1 = R1/d2 - tau/(2 d1 d2) 1,  L2 = R2/d1 - tau/(2 d1 d2) 1,
// with R1 = a - Tr_2 W, R2 = b - Tr_1 W, tau the averaged residual trace.
inline MarginalProjection project_marginals(const ComplexMatrix& w, const ComplexMatrix& a,
                                            const ComplexMatrix& b, int d1, int d2) {
  if (a.dim() != d1 || b.dim() != d2 || w.dim() != d1 * d2)
    throw DimensionError("project_marginals: inconsistent dimensions");
  ComplexMatrix r1 = a - ptrace_keep1(w, d1, d2);
  ComplexMatrix r2 = b - ptrace_keep2(w, d1, d2);
  const double tau = 0.5 * (trace(r1).real() + trace(r2).real());
  const double shift = tau / (2.0 * d1 * d2);
  ComplexMatrix l1 = r1 * cplx(1.0 / d2);
  ComplexMatrix l2 = r2 * cplx(1.0 / d1);
  for (int i = 0; i < d1; ++i) l1(i, i) -= shift;
  for (int k = 0; k < d2; ++k) l2(k, k) -= shift;
  MarginalProjection p;
  p.x = w;
  for (int i = 0; i < d1; ++i)
    for (int j = 0; j < d1; ++j) {
      const cplx l1ij = l1(i, j);
      for (int k = 0; k < d2; ++k) p.x(i * d2 + k, j * d2 + k) += l1ij;
    }
  for (int i = 0; i < d1; ++i)
    for (int k = 0; k < d2; ++k)
      for (int l = 0; l < d2; ++l) p.x(i * d2 + k, i * d2 + l) += l2(k, l);
  p.lambda1 = std::move(l1);
  p.lambda2 = std::move(l2);
  return p;
}

// Eigenvalue clipping at zero for a real symmetric matrix.
inline RealMatrix psd_clip_sym(const RealMatrix& w) {
  RealEigDecomposition e = symmetric_eig(w, /*sorted=*/false);
  const int m = w.dim();
  RealMatrix z(m);
  for (int k = 0; k < m; ++k) {
    const double lam = e.values[k];
    if (lam <= 0.0) continue;
    for (int i = 0; i < m; ++i) {
      const double vik = e.vectors(i, k) * lam;
      if (vik == 0.0) continue;
      for (int j = 0; j < m; ++j) z(i, j) += vik * e.vectors(j, k);
    }
  }
  return hermitize(z);
}

struct AdmmResult {
  ComplexMatrix x;
  ComplexMatrix y1, y2;
  double primal = 0;
  double dual_bound = 0;
  double min_slack_eig = 0;
  long iterations = 0;
  bool converged = false;
  double primal_residual = 0, dual_residual = 0, rel_gap = 0;
};

// Solve the regularized least-squares system (D^T D + reg) gamma = D^T f;
// Gaussian elimination with partial pivoting on the normal equations.
inline std::vector<double> solve_normal_eqs(const std::vector<std::vector<double>>& cols,
                                            const std::vector<double>& f) {
  const int h = static_cast<int>(cols.size());
  std::vector<std::vector<double>> m(h, std::vector<double>(h + 1, 0.0));
  double diag_max = 0.0;
  for (int i = 0; i < h; ++i) {
    for (int j = i; j < h; ++j) {
      double s = 0.0;
      for (size_t t = 0; t < f.size(); ++t) s += cols[i][t] * cols[j][t];
      m[i][j] = m[j][i] = s;
    }
    diag_max = std::max(diag_max, m[i][i]);
    double s = 0.0;
    for (size_t t = 0; t < f.size(); ++t) s += cols[i][t] * f[t];
    m[i][h] = s;
  }
  const double reg = 1e-12 * diag_max + 1e-30;
  for (int i = 0; i < h; ++i) m[i][i] += reg;
  for (int p = 0; p < h; ++p) {
    int piv = p;
    for (int i = p + 1; i < h; ++i)
      if (std::abs(m[i][p]) > std::abs(m[piv][p])) piv = i;
    std::swap(m[p], m[piv]);
    for (int i = p + 1; i < h; ++i) {
      const double fac = m[i][p] / m[p][p];
      for (int j = p; j <= h; ++j) m[i][j] -= fac * m[p][j];
    }
  }
  std::vector<double> gamma(h, 0.0);
  for (int i = h - 1; i >= 0; --i) {
    double s = m[i][h];
    for (int j = i + 1; j < h; ++j) s -= m[i][j] * gamma[j];
    gamma[i] = s / m[i][i];
  }
  return gamma;
}

// Hermitian matrices as real coordinate vectors: d diagonal entries followed
// by (re, im) pairs of the upper triangle.
inline int hermitian_param_count(int d) { return d * d; }

inline ComplexMatrix hermitian_from_params(const double* p, int d) {
  ComplexMatrix m(d);
  int idx = 0;
  for (int i = 0; i < d; ++i) m(i, i) = p[idx++];
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const double re = p[idx++];
      const double im = p[idx++];
      m(i, j) = cplx(re, im);
      m(j, i) = cplx(re, -im);
    }
  return m;
}

inline void hermitian_to_params(const ComplexMatrix& m, double* p) {
  const int d = m.dim();
  int idx = 0;
  for (int i = 0; i < d; ++i) p[idx++] = m(i, i).real();
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      p[idx++] = m(i, j).real();
      p[idx++] = m(i, j).imag();
    }
}

struct PolishOutcome {
  bool accepted = false;
  ComplexMatrix x, y1, y2;
  double primal = 0, dual_bound = 0, min_slack_eig = 0;
  double marginal_residual = 0, psd_violation = 0, rel_gap = 0;
};

// Face polish: estimate the kernel of the optimal slack from the current
// dual iterate, then recover the exact solution on that face from two small
// decoupled least-squares systems --
//   dual:   (C - Y1 (x) 1 - 1 (x) Y2) Q = 0        (stationarity on the face)
//   primal: marginals of Q M Q^dagger = (a, b)     (feasibility on the face)
// -- and accept only if the polished pair verifies: PSD sides, feasibility
// and a certified duality gap below accept_gap. First-order iterations creep
// sublinearly on near-degenerate marginals; the polish closes those last few
// digits exactly.
inline PolishOutcome try_polish(const ComplexMatrix& c, const ComplexMatrix& a,
                                const ComplexMatrix& b, int d1, int d2,
                                const ComplexMatrix& slack_est, const ComplexMatrix& x_ref,
                                const ComplexMatrix& z_ref, double accept_gap) {
  PolishOutcome out;
  const int n = d1 * d2;
  const EigDecomposition es = hermitian_eig(slack_est);
  const EigDecomposition ex = hermitian_eig(x_ref);
  const double mu_scale = std::max(1.0, es.values.front());

  // primal eigenvectors ordered by eigenvalue magnitude: small negative dips
  // of the affine iterate mark directions the cone projection keeps clipping
  std::vector<int> x_order(n);
  for (int i = 0; i < n; ++i) x_order[i] = i;
  std::stable_sort(x_order.begin(), x_order.end(), [&](int i, int j) {
    return std::abs(ex.values[i]) > std::abs(ex.values[j]);
  });

  // Face candidates from both sides of complementarity: spans of the smallest
  // slack eigenvectors and of the dominant primal eigenvectors. Wrong guesses
  // are rejected by the verification step, so over-proposing is harmless.
  struct FaceCandidate {
    bool from_slack;
    int k;
  };
  std::vector<FaceCandidate> candidates;
  {
    int k_slack = 0;
    for (double mu : es.values)
      if (mu <= 0.2 * mu_scale) ++k_slack;
    for (int k = 1; k <= k_slack; ++k) candidates.push_back({true, k});
    for (int k = 1; k < n; ++k) candidates.push_back({false, k});
    for (int k = k_slack + 1; k <= n; ++k) candidates.push_back({true, k});
  }

  const int py1 = hermitian_param_count(d1);
  const int py2 = hermitian_param_count(d2);

  for (const FaceCandidate& cand : candidates) {
    const int k = cand.k;
    std::vector<std::vector<cplx>> q(k, std::vector<cplx>(n));
    for (int col = 0; col < k; ++col)
      for (int i = 0; i < n; ++i)
        q[col][i] = cand.from_slack ? es.vectors(i, n - 1 - col) : ex.vectors(i, x_order[col]);

    auto apply_lstar_col = [&](const ComplexMatrix& y1b, const ComplexMatrix& y2b,
                               const std::vector<cplx>& qcol) {
      std::vector<cplx> out_col(n, cplx{});
      if (y1b.dim() == d1) {
        for (int i = 0; i < d1; ++i)
          for (int j = 0; j < d1; ++j) {
            const cplx v = y1b(i, j);
            if (v == cplx{}) continue;
            for (int kk = 0; kk < d2; ++kk) out_col[i * d2 + kk] += v * qcol[j * d2 + kk];
          }
      }
      if (y2b.dim() == d2) {
        for (int i = 0; i < d1; ++i)
          for (int kk = 0; kk < d2; ++kk)
            for (int ll = 0; ll < d2; ++ll) out_col[i * d2 + kk] += y2b(kk, ll) * qcol[i * d2 + ll];
      }
      return out_col;
    };

    // --- dual least squares over (Y1, Y2), with kernel refinement ---
    // The initial Q carries the iterate's error; re-extracting the near-kernel
    // of the exact slack S(y) and re-solving locks onto the true face.
    ComplexMatrix y1(d1), y2(d2), slack(n);
    double mu_min = 0.0;
    for (int refine = 0; refine < 3; ++refine) {
      const size_t rows = 2 * static_cast<size_t>(n) * k;
      std::vector<std::vector<double>> cols(py1 + py2, std::vector<double>(rows));
      std::vector<double> rhs(rows);
      for (int col = 0; col < k; ++col) {
        std::vector<cplx> cq(n, cplx{});
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) cq[i] += c(i, j) * q[col][j];
        for (int i = 0; i < n; ++i) {
          rhs[2 * (static_cast<size_t>(col) * n + i)] = cq[i].real();
          rhs[2 * (static_cast<size_t>(col) * n + i) + 1] = cq[i].imag();
        }
      }
      std::vector<double> params(std::max(py1, py2), 0.0);
      for (int pb = 0; pb < py1 + py2; ++pb) {
        std::fill(params.begin(), params.end(), 0.0);
        const bool first = pb < py1;
        params[first ? pb : pb - py1] = 1.0;
        const ComplexMatrix basis = hermitian_from_params(params.data(), first ? d1 : d2);
        const ComplexMatrix none;
        for (int col = 0; col < k; ++col) {
          const std::vector<cplx> lc =
              first ? apply_lstar_col(basis, none, q[col]) : apply_lstar_col(none, basis, q[col]);
          for (int i = 0; i < n; ++i) {
            cols[pb][2 * (static_cast<size_t>(col) * n + i)] = lc[i].real();
            cols[pb][2 * (static_cast<size_t>(col) * n + i) + 1] = lc[i].imag();
          }
        }
      }
      const std::vector<double> y_params = solve_normal_eqs(cols, rhs);
      y1 = hermitian_from_params(y_params.data(), d1);
      y2 = hermitian_from_params(y_params.data() + py1, d2);
      slack = hermitize(c - kron(y1, ComplexMatrix::identity(d2)) -
                        kron(ComplexMatrix::identity(d1), y2));
      const EigDecomposition er = hermitian_eig(slack);
      mu_min = er.values.back();
      for (int col = 0; col < k; ++col)
        for (int i = 0; i < n; ++i) q[col][i] = er.vectors(i, n - 1 - col);
    }
    const bool ptrace = std::getenv("QWOT_POLISH_TRACE") != nullptr;
    if (mu_min < -1e-6 * mu_scale) {
      if (ptrace) std::fprintf(stderr, "  polish k=%d: slack infeasible mu_min=%.3e\n", k, mu_min);
      continue;
    }

    // --- primal least squares over the face coefficients M ---
    // start from the compressed PSD iterate and correct the marginals by the
    // minimum-norm update
    ComplexMatrix m_ref(k);
    for (int r = 0; r < k; ++r)
      for (int s = 0; s < k; ++s) {
        cplx acc{};
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) acc += std::conj(q[r][i]) * z_ref(i, j) * q[s][j];
        m_ref(r, s) = acc;
      }
    m_ref = hermitize(m_ref);

    auto lift_face = [&](const ComplexMatrix& m) {
      ComplexMatrix x(n);
      for (int r = 0; r < k; ++r)
        for (int s = 0; s < k; ++s) {
          const cplx v = m(r, s);
          if (v == cplx{}) continue;
          for (int i = 0; i < n; ++i) {
            const cplx left = q[r][i] * v;
            for (int j = 0; j < n; ++j) x(i, j) += left * std::conj(q[s][j]);
          }
        }
      return x;
    };

    const int pm = hermitian_param_count(k);
    const int crows = py1 + py2;
    auto marginal_params = [&](const ComplexMatrix& x, std::vector<double>& v) {
      v.resize(crows);
      hermitian_to_params(ptrace_keep1(x, d1, d2), v.data());
      hermitian_to_params(ptrace_keep2(x, d1, d2), v.data() + py1);
    };

    std::vector<std::vector<double>> jt(pm, std::vector<double>(crows));
    std::vector<double> mparams(pm);
    for (int pb = 0; pb < pm; ++pb) {
      std::fill(mparams.begin(), mparams.end(), 0.0);
      mparams[pb] = 1.0;
      std::vector<double> v;
      marginal_params(lift_face(hermitian_from_params(mparams.data(), k)), v);
      jt[pb] = std::move(v);
    }
    std::vector<double> target(crows);
    hermitian_to_params(a, target.data());
    hermitian_to_params(b, target.data() + py1);
    std::vector<double> resid(crows);

    // minimum-norm correction: delta = J^T lambda with (J J^T) lambda = resid
    std::vector<std::vector<double>> jjt_cols(crows, std::vector<double>(crows));
    for (int i = 0; i < crows; ++i)
      for (int j = 0; j < crows; ++j) {
        double s = 0.0;
        for (int pb = 0; pb < pm; ++pb) s += jt[pb][i] * jt[pb][j];
        jjt_cols[i][j] = s;
      }
    auto correct_marginals = [&](ComplexMatrix m) {
      std::vector<double> cur;
      marginal_params(lift_face(m), cur);
      for (int i = 0; i < crows; ++i) resid[i] = target[i] - cur[i];
      const std::vector<double> lam = solve_normal_eqs(jjt_cols, resid);
      std::vector<double> delta(pm, 0.0);
      for (int pb = 0; pb < pm; ++pb)
        for (int i = 0; i < crows; ++i) delta[pb] += jt[pb][i] * lam[i];
      return m + hermitian_from_params(delta.data(), k);
    };

    // alternate marginal restoration with PSD clipping until both hold; the
    // face problem is tiny, so a generous round count costs nothing
    ComplexMatrix m_fix = correct_marginals(m_ref);
    for (int round = 0; round < 100; ++round) {
      const double lam_min = min_eigenvalue(m_fix);
      if (lam_min >= -1e-10) break;
      m_fix = correct_marginals(psd_project(m_fix));
    }
    const ComplexMatrix x_pol = hermitize(lift_face(m_fix));

    // --- verification ---
    const double marg_res = std::max(frobenius_norm(ptrace_keep1(x_pol, d1, d2) - a),
                                     frobenius_norm(ptrace_keep2(x_pol, d1, d2) - b));
    if (marg_res > 1e-11) {
      if (ptrace) std::fprintf(stderr, "  polish k=%d: marginal residual %.3e\n", k, marg_res);
      continue;
    }
    const double m_min = min_eigenvalue(m_fix);
    if (m_min < -1e-10) {
      if (ptrace) std::fprintf(stderr, "  polish k=%d: face coefficients min eig %.3e\n", k, m_min);
      continue;
    }

    if (mu_min < 0.0) {
      for (int i = 0; i < d1; ++i) y1(i, i) += mu_min;
    }
    const double primal = trace_prod(c, x_pol).real();
    const double bound = trace_prod(y1, a).real() + trace_prod(y2, b).real();
    const double gap = std::abs(primal - bound) / std::max(1.0, std::abs(primal));
    if (gap > accept_gap) {
      if (ptrace)
        std::fprintf(stderr, "  polish k=%d: gap %.3e (primal %.10f bound %.10f mu_min %.3e)\n", k,
                     gap, primal, bound, mu_min);
      continue;
    }

    out.accepted = true;
    out.x = x_pol;
    out.y1 = std::move(y1);
    out.y2 = std::move(y2);
    out.primal = primal;
    out.dual_bound = bound;
    out.min_slack_eig = mu_min;
    out.marginal_residual = marg_res;
    out.psd_violation = std::max(0.0, -m_min);
    out.rel_gap = gap;
    return out;
  }
  return out;
}

// One application of the splitting map on the stacked iterate g = (z, u):
// affine projection of z - u - C/sigma, over-relaxed PSD-cone step, dual
// update. Also reports the standard residuals and the gap estimate.
struct AdmmKernel {
  const ComplexMatrix& c;
  const ComplexMatrix& a;
  const ComplexMatrix& b;
  int d1, d2, n, m;
  double sigma, alpha, tol;
  RealMatrix c_scaled;

  // per-step outputs
  ComplexMatrix xc, lambda1, lambda2;
  double r = 0, s = 0, gap = 0, primal = 0, bound_est = 0;
  bool pass = false;

  AdmmKernel(const ComplexMatrix& c_, const ComplexMatrix& a_, const ComplexMatrix& b_, int d1_,
             int d2_, double sigma_, double alpha_, double tol_)
      : c(c_), a(a_), b(b_), d1(d1_), d2(d2_), n(d1_ * d2_), m(2 * d1_ * d2_), sigma(sigma_),
        alpha(alpha_), tol(tol_), c_scaled(embed_real(c_ * cplx(1.0 / sigma_))) {}

  size_t dim() const { return 2 * static_cast<size_t>(m) * m; }

  void step(const std::vector<double>& g, std::vector<double>& g_next) {
    const size_t mm = static_cast<size_t>(m) * m;
    RealMatrix v(m);
    for (size_t t = 0; t < mm; ++t) v.data()[t] = g[t] - g[mm + t] - c_scaled.data()[t];
    MarginalProjection proj = project_marginals(extract_hermitian(v), a, b, d1, d2);
    xc = std::move(proj.x);
    lambda1 = std::move(proj.lambda1);
    lambda2 = std::move(proj.lambda2);
    const RealMatrix x = embed_real(xc);

    RealMatrix w(m);
    for (size_t t = 0; t < mm; ++t) {
      const double xhat = alpha * x.data()[t] + (1.0 - alpha) * g[t];
      w.data()[t] = xhat + g[mm + t];
    }
    const RealMatrix znext = psd_clip_sym(w);
    g_next.resize(2 * mm);
    for (size_t t = 0; t < mm; ++t) {
      g_next[t] = znext.data()[t];
      g_next[mm + t] = w.data()[t] - znext.data()[t];  // u + xhat - z_next
    }

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    double rr = 0.0, ss = 0.0, nx = 0.0, nz = 0.0, nu = 0.0;
    for (size_t t = 0; t < mm; ++t) {
      const double dxz = x.data()[t] - g_next[t];
      const double dz = g_next[t] - g[t];
      rr += dxz * dxz;
      ss += dz * dz;
      nx += x.data()[t] * x.data()[t];
      nz += g_next[t] * g_next[t];
      nu += g_next[mm + t] * g_next[mm + t];
    }
    r = std::sqrt(rr) * inv_sqrt2;
    s = sigma * std::sqrt(ss) * inv_sqrt2;
    primal = trace_prod(c, xc).real();
    bound_est = sigma * (trace_prod(lambda1, a).real() + trace_prod(lambda2, b).real());
    gap = std::abs(primal - bound_est) / std::max(1.0, std::abs(primal));
    const double eps_p = tol * std::max(1.0, std::max(std::sqrt(nx), std::sqrt(nz)) * inv_sqrt2);
    const double eps_d = tol * std::max(1.0, sigma * std::sqrt(nu) * inv_sqrt2);
    pass = r <= eps_p && s <= eps_d && gap <= tol;
  }
};

// Operator-splitting iteration on the real symmetric embedding of the
// complex SDP, driven through safeguarded Anderson acceleration of the
// fixed-point map. Accelerated candidates that fail to decrease the
// fixed-point residual are reverted to the plain step, so the base
// iteration's convergence is preserved. Inner products in the embedding are
// twice the complex ones, so residual and objective bookkeeping divides by
// sqrt(2) and 2 respectively. Deterministic throughout.
inline AdmmResult admm_solve(const ComplexMatrix& c, const ComplexMatrix& a,
                             const ComplexMatrix& b, int d1, int d2,
                             const SolverOptions& opts) {
  const int n = d1 * d2;
  const int m = 2 * n;
  const double norm_c = frobenius_norm(c);
  const double sigma = opts.penalty > 0.0 ? opts.penalty : (norm_c > 1e-12 ? norm_c : 1.0);
  AdmmKernel kernel(c, a, b, d1, d2, sigma, opts.over_relax, opts.tol);

  const size_t mm = static_cast<size_t>(m) * m;
  std::vector<double> g(2 * mm, 0.0);
  {
    const RealMatrix z0 = opts.init_coupling
                              ? embed_real(hermitize(*opts.init_coupling))
                              : embed_real(kron(a, b) * cplx(1.0 / trace(b).real()));
    for (size_t t = 0; t < mm; ++t) g[t] = z0.data()[t];
    if (opts.init_y1 && opts.init_y2) {
      const ComplexMatrix slack0 = c - kron(*opts.init_y1, ComplexMatrix::identity(d2)) -
                                   kron(ComplexMatrix::identity(d1), *opts.init_y2);
      const RealMatrix u0 = embed_real(slack0 * cplx(-1.0 / sigma));
      for (size_t t = 0; t < mm; ++t) g[mm + t] = u0.data()[t];
    }
  }

  std::vector<double> g_next, f(2 * mm), g_prev, f_prev, plain_prev;
  std::vector<std::vector<double>> dg_hist, df_hist;
  bool have_prev = false;
  bool last_was_candidate = false;
  double fn_accept = 0.0;

  AdmmResult res;
  PolishOutcome polish;
  const double polish_accept = 0.2 * opts.tol;
  auto attempt_polish = [&](const std::vector<double>& state) {
    RealMatrix zb(m), ub(m);
    for (size_t t = 0; t < mm; ++t) {
      zb.data()[t] = state[t];
      ub.data()[t] = -sigma * state[mm + t];
    }
    polish = try_polish(c, a, b, d1, d2, hermitize(extract_hermitian(ub)), hermitize(kernel.xc),
                        extract_hermitian(zb), polish_accept);
    return polish.accepted;
  };

  long k = 0;
  for (k = 1; k <= opts.max_iters; ++k) {
    kernel.step(g, g_next);
    double fn = 0.0;
    for (size_t t = 0; t < f.size(); ++t) {
      f[t] = g_next[t] - g[t];
      fn += f[t] * f[t];
    }
    fn = std::sqrt(fn);

    res.primal_residual = kernel.r;
    res.dual_residual = kernel.s;
    res.rel_gap = kernel.gap;
    if (opts.trace_every > 0 && k % opts.trace_every == 0)
      std::fprintf(stderr, "  iter %8ld  r=%.3e s=%.3e gap=%.3e fn=%.3e primal=%.12f dual=%.12f\n",
                   k, kernel.r, kernel.s, kernel.gap, fn, kernel.primal, kernel.bound_est);
    if (kernel.pass) {
      res.converged = true;
      break;
    }
    if (k % 100 == 0 && kernel.gap <= 1e-2 && attempt_polish(g_next)) {
      res.converged = true;
      break;
    }

    // safeguard: an accelerated candidate must not increase the residual
    if (last_was_candidate && fn > fn_accept) {
      g = plain_prev;
      dg_hist.clear();
      df_hist.clear();
      have_prev = false;
      last_was_candidate = false;
      continue;
    }

    if (opts.anderson_memory > 0) {
      if (have_prev) {
        std::vector<double> dg(f.size()), df(f.size());
        for (size_t t = 0; t < f.size(); ++t) {
          dg[t] = g[t] - g_prev[t];
          df[t] = f[t] - f_prev[t];
        }
        dg_hist.push_back(std::move(dg));
        df_hist.push_back(std::move(df));
        if (static_cast<int>(dg_hist.size()) > opts.anderson_memory) {
          dg_hist.erase(dg_hist.begin());
          df_hist.erase(df_hist.begin());
        }
      }
      g_prev = g;
      f_prev = f;
      have_prev = true;
      plain_prev = g_next;

      if (!dg_hist.empty()) {
        const std::vector<double> gamma = solve_normal_eqs(df_hist, f);
        std::vector<double> cand = g_next;  // g + f
        bool finite = true;
        for (size_t i = 0; i < gamma.size(); ++i) {
          if (!std::isfinite(gamma[i])) {
            finite = false;
            break;
          }
          for (size_t t = 0; t < cand.size(); ++t)
            cand[t] -= gamma[i] * (dg_hist[i][t] + df_hist[i][t]);
        }
        if (finite) {
          g = std::move(cand);
          last_was_candidate = true;
          fn_accept = fn;
          continue;
        }
      }
    }
    g = g_next;
    last_was_candidate = false;
  }
  res.iterations = std::min(k, opts.max_iters);

  // last-chance polish when the iteration cap ran out on a usable iterate
  if (!res.converged && !polish.accepted && !g_next.empty() && kernel.gap <= 1e-2 &&
      attempt_polish(g_next))
    res.converged = true;

  if (polish.accepted) {
    res.x = polish.x;
    res.y1 = polish.y1;
    res.y2 = polish.y2;
    res.primal = polish.primal;
    res.dual_bound = polish.dual_bound;
    res.min_slack_eig = polish.min_slack_eig;
    res.primal_residual = std::max(polish.marginal_residual, polish.psd_violation);
    res.dual_residual = std::max(0.0, -polish.min_slack_eig);
    res.rel_gap = polish.rel_gap;
    return res;
  }

  // dual certificate: multipliers of the affine step, repaired to exact
  // feasibility by shifting Y1 with the most negative slack eigenvalue
  ComplexMatrix y1 = hermitize(kernel.lambda1 * cplx(sigma));
  ComplexMatrix y2 = hermitize(kernel.lambda2 * cplx(sigma));
  const ComplexMatrix slack =
      hermitize(c - kron(y1, ComplexMatrix::identity(d2)) - kron(ComplexMatrix::identity(d1), y2));
  const double mu_min = min_eigenvalue(slack);
  res.min_slack_eig = mu_min;
  if (mu_min < 0.0) {
    // lowering Y1 by |mu_min| adds |mu_min| * 1 to the slack, restoring
    // feasibility at the cost of the same amount in the bound
    for (int i = 0; i < d1; ++i) y1(i, i) += mu_min;
  }
  res.dual_bound = trace_prod(y1, a).real() + trace_prod(y2, b).real();
  res.y1 = std::move(y1);
  res.y2 = std::move(y2);
  res.x = hermitize(kernel.xc);
  res.primal = trace_prod(c, res.x).real();
  return res;
}

// Support face of a marginal: eigenvectors whose eigenvalues exceed
// 1e-12 * lambda_max. Columns are returned as plain vectors.
inline std::vector<std::vector<cplx>> support_basis(const ComplexMatrix& m) {
  EigDecomposition e = hermitian_eig(m);
  const double cutoff = 1e-12 * std::max(e.values.front(), 0.0);
  std::vector<std::vector<cplx>> cols;
  for (size_t k = 0; k < e.values.size(); ++k) {
    if (e.values[k] <= cutoff) continue;
    std::vector<cplx> col(m.dim());
    for (int i = 0; i < m.dim(); ++i) col[i] = e.vectors(i, static_cast<int>(k));
    cols.push_back(std::move(col));
  }
  return cols;
}

// Compress a one-side operator into a face basis: (P^dagger M P)[r][s].
inline ComplexMatrix compress(const ComplexMatrix& m, const std::vector<std::vector<cplx>>& p) {
  const int r = static_cast<int>(p.size());
  const int d = m.dim();
  ComplexMatrix out(r);
  for (int s = 0; s < r; ++s) {
    std::vector<cplx> mp(d, cplx{});
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) mp[i] += m(i, j) * p[s][j];
    for (int q = 0; q < r; ++q) {
      cplx acc{};
      for (int i = 0; i < d; ++i) acc += std::conj(p[q][i]) * mp[i];
      out(q, s) = acc;
    }
  }
  return out;
}

// (P_A (x) P_B)^dagger X (P_A (x) P_B) for a bipartite operator on C^d (x) C^d.
inline ComplexMatrix compress_bipartite(const ComplexMatrix& x, int d,
                                        const std::vector<std::vector<cplx>>& pa,
                                        const std::vector<std::vector<cplx>>& pb) {
  const int ra = static_cast<int>(pa.size());
  const int rb = static_cast<int>(pb.size());
  const int n_red = ra * rb;
  // stage 1: right-multiply by P_A (x) P_B
  std::vector<std::vector<cplx>> t(static_cast<size_t>(d) * d,
                                   std::vector<cplx>(n_red, cplx{}));
  for (int row = 0; row < d * d; ++row)
    for (int j = 0; j < d; ++j)
      for (int l = 0; l < d; ++l) {
        const cplx xval = x(row, j * d + l);
        if (xval == cplx{}) continue;
        for (int jp = 0; jp < ra; ++jp) {
          const cplx paj = pa[jp][j];
          if (paj == cplx{}) continue;
          for (int lp = 0; lp < rb; ++lp) t[row][jp * rb + lp] += xval * paj * pb[lp][l];
        }
      }
  // stage 2: left-multiply by (P_A (x) P_B)^dagger
  ComplexMatrix out(n_red);
  for (int col = 0; col < n_red; ++col)
    for (int i = 0; i < d; ++i)
      for (int kq = 0; kq < d; ++kq) {
        const cplx tval = t[static_cast<size_t>(i) * d + kq][col];
        if (tval == cplx{}) continue;
        for (int ip = 0; ip < ra; ++ip) {
          const cplx pai = std::conj(pa[ip][i]);
          if (pai == cplx{}) continue;
          for (int kp = 0; kp < rb; ++kp)
            out(ip * rb + kp, col) += pai * std::conj(pb[kp][kq]) * tval;
        }
      }
  return out;
}

// (P_A (x) P_B) X' (P_A (x) P_B)^dagger, lifting a face-reduced coupling back.
inline ComplexMatrix lift_bipartite(const ComplexMatrix& xr, int d,
                                    const std::vector<std::vector<cplx>>& pa,
                                    const std::vector<std::vector<cplx>>& pb) {
  const int ra = static_cast<int>(pa.size());
  const int rb = static_cast<int>(pb.size());
  ComplexMatrix out(d * d);
  for (int ip = 0; ip < ra; ++ip)
    for (int kp = 0; kp < rb; ++kp)
      for (int jp = 0; jp < ra; ++jp)
        for (int lp = 0; lp < rb; ++lp) {
          const cplx xval = xr(ip * rb + kp, jp * rb + lp);
          if (xval == cplx{}) continue;
          for (int i = 0; i < d; ++i) {
            const cplx left_a = pa[ip][i];
            if (left_a == cplx{}) continue;
            for (int k = 0; k < d; ++k) {
              const cplx left = left_a * pb[kp][k] * xval;
              if (left == cplx{}) continue;
              for (int j = 0; j < d; ++j) {
                const cplx right_a = std::conj(pa[jp][j]);
                if (right_a == cplx{}) continue;
                for (int l = 0; l < d; ++l)
                  out(i * d + k, j * d + l) += left * right_a * std::conj(pb[lp][l]);
              }
            }
          }
        }
  return out;
}

}  // namespace detail

/// Frobenius-nearest Hermitian matrix satisfying Tr_2 X = a and Tr_1 X = b
/// on C^d (x) C^d. Requires Tr(a) = Tr(b); a mismatch is spread in
/// least-squares fashion.
inline ComplexMatrix affine_project(const ComplexMatrix& x, const ComplexMatrix& a,
                                    const ComplexMatrix& b) {
  return detail::project_marginals(hermitize(x), a, b, a.dim(), b.dim()).x;
}

/// Weak-duality certificate check. If C - Y1 (x) 1 - 1 (x) Y2 is PSD within
/// `slack_tol`, `bound` = Tr(Y1 A) + Tr(Y2 B) is a valid lower bound on the
/// SDP optimum; otherwise `feasible` is false and `min_slack_eig` reports the
/// infeasibility margin.
struct DualCertificate {
  bool feasible = false;
  double bound = 0;
  double min_slack_eig = 0;
};

inline DualCertificate dual_bound(const SdpProblem& p, const ComplexMatrix& y1,
                                  const ComplexMatrix& y2, double slack_tol = 1e-9) {
  const int d = p.marginal_1.dim();
  const ComplexMatrix eye = ComplexMatrix::identity(d);
  ComplexMatrix slack = p.cost - kron(y1, eye) - kron(eye, y2);
  DualCertificate cert;
  cert.min_slack_eig = min_eigenvalue(hermitize(slack));
  cert.feasible = cert.min_slack_eig >= -slack_tol;
  cert.bound = trace_prod(y1, p.marginal_1.matrix()).real() +
               trace_prod(y2, p.marginal_2.matrix()).real();
  return cert;
}

/// Solve the coupling SDP. Rank-deficient marginals are first compressed to
/// their support face (Slater regularity is restored there; couplings of the
/// original problem live on that face), then the operator-splitting iteration
/// runs on the reduced problem. Deterministic for identical inputs/options.
inline SdpSolution solve_coupling(const SdpProblem& p, const SolverOptions& opts = {}) {
  const int d = p.marginal_1.dim();
  const int n = d * d;
  if (p.marginal_2.dim() != d) throw DimensionError("solve_coupling: marginal dims differ");
  if (p.cost.dim() != n) throw DimensionError("solve_coupling: cost dim must be d^2");
  if (n > 256) throw DimensionError("solve_coupling: d^2 must be <= 256");
  if (!is_hermitian(p.cost, tol::hermiticity))
    throw ValidationError("solve_coupling: cost is not Hermitian within 1e-10");
  const double trace_mismatch =
      std::abs(trace(p.marginal_1.matrix()) - trace(p.marginal_2.matrix()));
  if (trace_mismatch > 1e-10) {
    std::ostringstream os;
    os << "solve_coupling: marginal traces differ by " << trace_mismatch;
    throw ValidationError(os.str());
  }
  if (!(opts.over_relax > 0.0 && opts.over_relax < 2.0))
    throw ValidationError("solve_coupling: over_relax must be in (0,2)");
  if (opts.max_iters < 1) throw ValidationError("solve_coupling: max_iters must be >= 1");

  const ComplexMatrix c = hermitize(p.cost);
  const ComplexMatrix& a = p.marginal_1.matrix();
  const ComplexMatrix& b = p.marginal_2.matrix();

  std::vector<std::vector<cplx>> pa = detail::support_basis(a);
  std::vector<std::vector<cplx>> pb = detail::support_basis(b);
  const int ra = static_cast<int>(pa.size());
  const int rb = static_cast<int>(pb.size());

  SdpSolution sol;
  ComplexMatrix xc(n);

  if (ra == d && rb == d) {
    detail::AdmmResult res = detail::admm_solve(c, a, b, d, d, opts);
    xc = std::move(res.x);
    sol.primal_value = res.primal;
    sol.dual_bound = res.dual_bound;
    sol.iterations = res.iterations;
    sol.converged = res.converged;
    sol.primal_residual = res.primal_residual;
    sol.dual_residual = res.dual_residual;
    sol.rel_gap = res.rel_gap;
    sol.min_slack_eig = res.min_slack_eig;
    sol.y1 = std::move(res.y1);
    sol.y2 = std::move(res.y2);
  } else {
    // face reduction
    const ComplexMatrix a_red = hermitize(detail::compress(a, pa));
    const ComplexMatrix b_red = hermitize(detail::compress(b, pb));
    const ComplexMatrix c_red = hermitize(detail::compress_bipartite(c, d, pa, pb));
    SolverOptions red_opts = opts;
    if (opts.init_coupling)
      red_opts.init_coupling = detail::compress_bipartite(*opts.init_coupling, d, pa, pb);
    if (opts.init_y1) red_opts.init_y1 = detail::compress(*opts.init_y1, pa);
    if (opts.init_y2) red_opts.init_y2 = detail::compress(*opts.init_y2, pb);
    detail::AdmmResult res = detail::admm_solve(c_red, a_red, b_red, ra, rb, red_opts);
    xc = detail::lift_bipartite(res.x, d, pa, pb);
    xc = hermitize(xc);
    sol.primal_value = trace_prod(c, xc).real();
    sol.dual_bound = res.dual_bound;
    sol.iterations = res.iterations;
    sol.converged = res.converged;
    sol.primal_residual = res.primal_residual;
    sol.dual_residual = res.dual_residual;
    sol.rel_gap = res.rel_gap;
    sol.min_slack_eig = res.min_slack_eig;
    sol.y1 = std::move(res.y1);
    sol.y2 = std::move(res.y2);
    sol.face_reduced = true;
    sol.face_basis_1 = std::move(pa);
    sol.face_basis_2 = std::move(pb);
  }

  sol.coupling.residual_1 = frobenius_norm(partial_trace(xc, 2, d) - a);
  sol.coupling.residual_2 = frobenius_norm(partial_trace(xc, 1, d) - b);
  sol.coupling.mat = DensityMatrix::unchecked(std::move(xc));
  return sol;
}

}  // namespace qwot
