#include "auvfleet/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include <lapacke.h>

#include "auvfleet/errors.hpp"

namespace auvfleet {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

struct Inertia {
  int positive{0};
  int negative{0};
  int zero{0};
};

/// Bunch-Kaufman LDL' factorization of a dense symmetric matrix via LAPACK,
/// with the inertia recovered from the block-diagonal factor.
class SymmetricIndefiniteFactor {
 public:
  bool factor(const MatrixXd& k) {
    n_ = static_cast<int>(k.rows());
    original_ = k;
    a_ = k;
    ipiv_.resize(n_);
    const lapack_int info = LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', n_, a_.data(), n_,
                                           ipiv_.data());
    singular_ = info > 0;
    return info >= 0;
  }

  bool singular() const { return singular_; }

  Inertia inertia() const {
    Inertia res;
    int k = 0;
    while (k < n_) {
      if (ipiv_[k] > 0) {
        const double d = a_(k, k);
        if (d > 0.0)
          ++res.positive;
        else if (d < 0.0)
          ++res.negative;
        else
          ++res.zero;
        ++k;
      } else {
        // 2x2 pivot block; Bunch-Kaufman picks these indefinite.
        const double a = a_(k, k);
        const double b = a_(k + 1, k);
        const double c = a_(k + 1, k + 1);
        const double det = a * c - b * b;
        if (det < 0.0) {
          ++res.positive;
          ++res.negative;
        } else if (det > 0.0) {
          if (a + c > 0.0)
            res.positive += 2;
          else
            res.negative += 2;
        } else {
          ++res.zero;
          if (a + c > 0.0)
            ++res.positive;
          else if (a + c < 0.0)
            ++res.negative;
          else
            ++res.zero;
        }
        k += 2;
      }
    }
    return res;
  }

  // Backsolve with two rounds of iterative refinement; the KKT systems get
  // ill-conditioned as the barrier shrinks and plain backsolves stall the
  // outer iteration around 1e-4 stationarity.
  bool solve(VectorXd& rhs) const {
    const VectorXd b = rhs;
    if (LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', n_, 1, a_.data(), n_, ipiv_.data(),
                       rhs.data(), n_) != 0)
      return false;
    for (int round = 0; round < 2; ++round) {
      VectorXd residual =
          b - original_.selfadjointView<Eigen::Lower>() * rhs;
      if (LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', n_, 1, a_.data(), n_, ipiv_.data(),
                         residual.data(), n_) != 0)
        return false;
      rhs += residual;
    }
    return true;
  }

 private:
  int n_{0};
  MatrixXd a_;
  MatrixXd original_;
  std::vector<lapack_int> ipiv_;
  bool singular_{false};
};

/// Function, constraint and Jacobian values in the internally scaled space.
struct Evaluation {
  double f{0.0};
  VectorXd grad;
  VectorXd h;
  VectorXd g;
  MatrixXd jh;
  MatrixXd jg;
};

class IpSolver {
 public:
  IpSolver(const NlpProblem& problem, const SolverConfig& config)
      : p_(problem),
        cfg_(config),
        n_(problem.num_vars()),
        me_(problem.num_equalities()),
        mi_(problem.num_inequalities()),
        lb_(problem.lower_bounds()),
        ub_(problem.upper_bounds()),
        f_scale_(1.0),
        eq_scale_(VectorXd::Ones(me_)),
        ineq_scale_(VectorXd::Ones(mi_)) {
    if (lb_.size() != n_ || ub_.size() != n_)
      throw DimensionError("bound vectors must match the variable count");
    for (int i = 0; i < n_; ++i) {
      if (std::isfinite(lb_(i))) lower_idx_.push_back(i);
      if (std::isfinite(ub_(i))) upper_idx_.push_back(i);
    }
  }

  SolverResult run(const VectorXd& guess) {
    const auto t0 = std::chrono::steady_clock::now();
    SolverResult result = iterate(guess);
    result.solve_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
  }

 private:
  // Values only; line-search probes skip the derivatives.
  bool eval_values(const VectorXd& x, double& f, VectorXd& h, VectorXd& g) const {
    try {
      f = f_scale_ * p_.objective(x);
      h = eq_scale_.cwiseProduct(p_.equalities(x));
      g = ineq_scale_.cwiseProduct(p_.inequalities(x));
    } catch (const std::exception&) {
      return false;
    }
    return std::isfinite(f) && h.allFinite() && g.allFinite();
  }

  bool eval_full(const VectorXd& x, Evaluation& ev) const {
    try {
      ev.f = f_scale_ * p_.objective(x);
      ev.grad = f_scale_ * p_.objective_gradient(x);
      ev.h = eq_scale_.cwiseProduct(p_.equalities(x));
      ev.g = ineq_scale_.cwiseProduct(p_.inequalities(x));
      ev.jh = eq_scale_.asDiagonal() * p_.equality_jacobian(x);
      ev.jg = ineq_scale_.asDiagonal() * p_.inequality_jacobian(x);
    } catch (const std::exception&) {
      return false;
    }
    return std::isfinite(ev.f) && ev.grad.allFinite() && ev.h.allFinite() &&
           ev.g.allFinite() && ev.jh.allFinite() && ev.jg.allFinite();
  }

  // Gradient-based scaling factors from the start point; factors only ever
  // shrink rows, never amplify them.
  void compute_scaling(const VectorXd& x0) {
    constexpr double kMaxGradient = 100.0;
    try {
      const VectorXd grad = p_.objective_gradient(x0);
      if (grad.allFinite() && inf_norm(grad) > kMaxGradient)
        f_scale_ = kMaxGradient / inf_norm(grad);
      if (me_ > 0) {
        const MatrixXd jh = p_.equality_jacobian(x0);
        for (int r = 0; r < me_; ++r) {
          const double g = jh.row(r).cwiseAbs().maxCoeff();
          if (std::isfinite(g) && g > kMaxGradient) eq_scale_(r) = kMaxGradient / g;
        }
      }
      if (mi_ > 0) {
        const MatrixXd jg = p_.inequality_jacobian(x0);
        for (int r = 0; r < mi_; ++r) {
          const double g = jg.row(r).cwiseAbs().maxCoeff();
          if (std::isfinite(g) && g > kMaxGradient) ineq_scale_(r) = kMaxGradient / g;
        }
      }
    } catch (const std::exception&) {
      // Scaling stays at identity; the main loop reports the failure.
    }
  }

  VectorXd clip_to_interior(VectorXd x) const {
    for (int i = 0; i < n_; ++i) {
      const bool has_lo = std::isfinite(lb_(i));
      const bool has_up = std::isfinite(ub_(i));
      double push_lo = 0.0, push_up = 0.0;
      if (has_lo) push_lo = cfg_.bound_push * std::max(1.0, std::abs(lb_(i)));
      if (has_up) push_up = cfg_.bound_push * std::max(1.0, std::abs(ub_(i)));
      if (has_lo && has_up) {
        const double width = ub_(i) - lb_(i);
        push_lo = std::min(push_lo, 0.25 * width);
        push_up = std::min(push_up, 0.25 * width);
      }
      if (has_lo) x(i) = std::max(x(i), lb_(i) + push_lo);
      if (has_up) x(i) = std::min(x(i), ub_(i) - push_up);
    }
    return x;
  }

  double barrier_term(const VectorXd& x, const VectorXd& s) const {
    double b = 0.0;
    for (int j = 0; j < mi_; ++j) b -= std::log(s(j));
    for (int i : lower_idx_) b -= std::log(x(i) - lb_(i));
    for (int i : upper_idx_) b -= std::log(ub_(i) - x(i));
    return b;
  }

  // Residuals of the ORIGINAL (unscaled) problem, from scaled evaluations
  // and scaled multipliers.
  KktResiduals optimality(const VectorXd& x, const Evaluation& ev, const VectorXd& lam,
                          const VectorXd& y, const VectorXd& zl,
                          const VectorXd& zu) const {
    KktResiduals r;
    VectorXd stat = ev.grad;
    if (me_ > 0) stat += ev.jh.transpose() * lam;
    if (mi_ > 0) stat += ev.jg.transpose() * y;
    stat -= zl;
    stat += zu;
    r.stationarity = inf_norm(stat) / f_scale_;

    double primal = 0.0;
    for (int j = 0; j < me_; ++j)
      primal = std::max(primal, std::abs(ev.h(j)) / eq_scale_(j));
    for (int j = 0; j < mi_; ++j) primal = std::max(primal, ev.g(j) / ineq_scale_(j));
    r.primal_feasibility = std::max(primal, 0.0);

    double compl_ = 0.0;
    for (int j = 0; j < mi_; ++j) compl_ = std::max(compl_, std::abs(y(j) * ev.g(j)));
    for (int i : lower_idx_) compl_ = std::max(compl_, std::abs(zl(i) * (x(i) - lb_(i))));
    for (int i : upper_idx_) compl_ = std::max(compl_, std::abs(zu(i) * (ub_(i) - x(i))));
    r.complementarity = compl_ / f_scale_;
    return r;
  }

  // Scaled-space barrier-subproblem error for the Fiacco-McCormick schedule.
  double barrier_error(const VectorXd& x, const Evaluation& ev, const VectorXd& s,
                       const VectorXd& lam, const VectorXd& y, const VectorXd& zl,
                       const VectorXd& zu, double mu) const {
    VectorXd stat = ev.grad;
    if (me_ > 0) stat += ev.jh.transpose() * lam;
    if (mi_ > 0) stat += ev.jg.transpose() * y;
    stat -= zl;
    stat += zu;
    double err = inf_norm(stat);
    err = std::max(err, inf_norm(ev.h));
    if (mi_ > 0) err = std::max(err, inf_norm(ev.g + s));
    for (int j = 0; j < mi_; ++j) err = std::max(err, std::abs(s(j) * y(j) - mu));
    for (int i : lower_idx_)
      err = std::max(err, std::abs((x(i) - lb_(i)) * zl(i) - mu));
    for (int i : upper_idx_)
      err = std::max(err, std::abs((ub_(i) - x(i)) * zu(i) - mu));
    return err;
  }

  SolverResult iterate(const VectorXd& guess) {
    SolverResult res;
    if (guess.size() != n_) throw DimensionError("initial guess size mismatch");

    VectorXd x = clip_to_interior(guess);
    compute_scaling(x);

    Evaluation ev;
    if (!eval_full(x, ev)) {
      res.status = SolverStatus::kNumericalFailure;
      res.solution = x;
      res.multipliers = unscale(VectorXd::Zero(me_), VectorXd::Zero(mi_),
                                VectorXd::Zero(n_), VectorXd::Zero(n_));
      return res;
    }

    double mu = cfg_.initial_barrier;
    // The complementarity of the original problem is mu / f_scale on the
    // central path, so the floor must scale along.
    const double mu_floor = std::min(
        {cfg_.kkt_tolerance / 20.0, 1e-9, 0.1 * cfg_.kkt_tolerance * f_scale_});

    // Violated rows get a slack of the violation's own magnitude so the
    // first steps are not strangled by the fraction-to-boundary rule.
    VectorXd s(mi_), y(mi_);
    for (int j = 0; j < mi_; ++j) {
      s(j) = std::max(1e-4, std::abs(ev.g(j)));
      y(j) = mu / s(j);
    }
    VectorXd lam = VectorXd::Zero(me_);
    VectorXd zl = VectorXd::Zero(n_), zu = VectorXd::Zero(n_);
    for (int i : lower_idx_) zl(i) = mu / (x(i) - lb_(i));
    for (int i : upper_idx_) zu(i) = mu / (ub_(i) - x(i));

    double rho = 1.0;          // l1 penalty weight
    double delta_last = 0.0;   // last primal regularization
    int consecutive_ls_failures = 0;
    double best_infeasibility = kInf;
    int stall_count = 0;

    for (int iter = 0; iter < cfg_.max_iterations; ++iter) {
      res.iterations = iter + 1;

      const KktResiduals opt = optimality(x, ev, lam, y, zl, zu);
      if (opt.max() <= cfg_.kkt_tolerance) {
        res.status = SolverStatus::kConverged;
        return finish(res, x, lam, y, zl, zu, opt);
      }

      // Monotone barrier reduction once the subproblem is solved well enough.
      while (mu > mu_floor &&
             barrier_error(x, ev, s, lam, y, zl, zu, mu) <= 10.0 * mu) {
        mu = std::max(mu_floor,
                      std::min(cfg_.barrier_decrease * mu,
                               std::pow(mu, cfg_.barrier_exponent)));
      }

      // Infeasibility stall heuristic.
      const double infeas = std::max(inf_norm(ev.h), mi_ > 0 ? inf_norm(ev.g + s) : 0.0);
      if (infeas < best_infeasibility * 0.999) {
        best_infeasibility = std::min(best_infeasibility, infeas);
        stall_count = 0;
      } else if (infeas > 1e3 * cfg_.kkt_tolerance && mu <= 10.0 * mu_floor) {
        if (++stall_count >= 15) {
          res.status = SolverStatus::kInfeasibleDetected;
          return finish(res, x, lam, y, zl, zu, opt);
        }
      }

      // Reduced KKT right-hand side.
      VectorXd sigma_x = VectorXd::Zero(n_);
      VectorXd rx = ev.grad;
      if (me_ > 0) rx += ev.jh.transpose() * lam;
      if (mi_ > 0) rx += ev.jg.transpose() * y;
      rx -= zl;
      rx += zu;
      for (int i : lower_idx_) {
        const double gap = x(i) - lb_(i);
        sigma_x(i) += zl(i) / gap;
        rx(i) += (gap * zl(i) - mu) / gap;
      }
      for (int i : upper_idx_) {
        const double gap = ub_(i) - x(i);
        sigma_x(i) += zu(i) / gap;
        rx(i) -= (gap * zu(i) - mu) / gap;
      }
      VectorXd sigma_s(mi_);
      if (mi_ > 0) {
        VectorXd rs_fold(mi_);
        for (int j = 0; j < mi_; ++j) {
          sigma_s(j) = y(j) / s(j);
          const double r3 = ev.g(j) + s(j);
          const double r4 = s(j) * y(j) - mu;
          rs_fold(j) = sigma_s(j) * r3 - r4 / s(j);
        }
        rx += ev.jg.transpose() * rs_fold;
      }

      MatrixXd w = p_.lagrangian_hessian(x, f_scale_,
                                         lam.cwiseProduct(eq_scale_),
                                         y.cwiseProduct(ineq_scale_));
      if (!w.allFinite()) {
        res.status = SolverStatus::kNumericalFailure;
        return finish(res, x, lam, y, zl, zu, opt);
      }

      const int dim = n_ + me_;
      MatrixXd kkt(dim, dim);
      VectorXd step(dim);
      SymmetricIndefiniteFactor factor;

      // Inertia correction by incremental diagonal shifts.
      double delta_w = 0.0;
      double delta_c = 0.0;
      bool factored = false;
      for (int attempt = 0; attempt < 40 && !factored; ++attempt) {
        kkt.setZero();
        kkt.topLeftCorner(n_, n_) = w;
        kkt.topLeftCorner(n_, n_).diagonal() += sigma_x;
        if (mi_ > 0)
          kkt.topLeftCorner(n_, n_) +=
              ev.jg.transpose() * sigma_s.asDiagonal() * ev.jg;
        if (delta_w > 0.0) kkt.topLeftCorner(n_, n_).diagonal().array() += delta_w;
        if (me_ > 0) {
          kkt.bottomLeftCorner(me_, n_) = ev.jh;
          kkt.topRightCorner(n_, me_) = ev.jh.transpose();
          kkt.bottomRightCorner(me_, me_).diagonal().array() = -std::max(delta_c, 0.0);
        }

        if (factor.factor(kkt) && !factor.singular()) {
          const Inertia in = factor.inertia();
          if (in.positive == n_ && in.negative == me_ && in.zero == 0) {
            factored = true;
            break;
          }
          if (in.zero > 0 && delta_c == 0.0) delta_c = 1e-8;
        } else if (delta_c == 0.0) {
          delta_c = 1e-8;
        }
        delta_w = (delta_w == 0.0)
                      ? std::max(1e-20, (delta_last == 0.0) ? 1e-4 : delta_last / 3.0)
                      : delta_w * 8.0;
        if (delta_w > 1e40) break;
      }
      if (!factored) {
        res.status = SolverStatus::kNumericalFailure;
        return finish(res, x, lam, y, zl, zu, opt);
      }
      if (delta_w > 0.0) delta_last = delta_w;

      step.head(n_) = -rx;
      if (me_ > 0) step.tail(me_) = -ev.h;
      if (!factor.solve(step) || !step.allFinite()) {
        res.status = SolverStatus::kNumericalFailure;
        return finish(res, x, lam, y, zl, zu, opt);
      }
      const VectorXd dx = step.head(n_);
      const VectorXd dlam = me_ > 0 ? VectorXd(step.tail(me_)) : VectorXd(0);

      // Recover slack, inequality-dual and bound-dual directions.
      VectorXd ds(mi_), dy(mi_);
      if (mi_ > 0) {
        const VectorXd jg_dx = ev.jg * dx;
        for (int j = 0; j < mi_; ++j) {
          ds(j) = -(ev.g(j) + s(j)) - jg_dx(j);
          dy(j) = -(s(j) * y(j) - mu + y(j) * ds(j)) / s(j);
        }
      }
      VectorXd dzl = VectorXd::Zero(n_), dzu = VectorXd::Zero(n_);
      for (int i : lower_idx_) {
        const double gap = x(i) - lb_(i);
        dzl(i) = -((gap * zl(i) - mu) + zl(i) * dx(i)) / gap;
      }
      for (int i : upper_idx_) {
        const double gap = ub_(i) - x(i);
        dzu(i) = -((gap * zu(i) - mu) - zu(i) * dx(i)) / gap;
      }

      // Fraction-to-boundary step caps.
      const double tau = std::max(0.99, 1.0 - mu);
      double alpha_pr = 1.0;
      for (int j = 0; j < mi_; ++j)
        if (ds(j) < 0.0) alpha_pr = std::min(alpha_pr, -tau * s(j) / ds(j));
      for (int i : lower_idx_)
        if (dx(i) < 0.0) alpha_pr = std::min(alpha_pr, -tau * (x(i) - lb_(i)) / dx(i));
      for (int i : upper_idx_)
        if (dx(i) > 0.0) alpha_pr = std::min(alpha_pr, tau * (ub_(i) - x(i)) / dx(i));
      double alpha_du = 1.0;
      for (int j = 0; j < mi_; ++j)
        if (dy(j) < 0.0) alpha_du = std::min(alpha_du, -tau * y(j) / dy(j));
      for (int i : lower_idx_)
        if (dzl(i) < 0.0) alpha_du = std::min(alpha_du, -tau * zl(i) / dzl(i));
      for (int i : upper_idx_)
        if (dzu(i) < 0.0) alpha_du = std::min(alpha_du, -tau * zu(i) / dzu(i));

      // l1 merit line search.
      const double cnorm = ev.h.lpNorm<1>() + (mi_ > 0 ? (ev.g + s).lpNorm<1>() : 0.0);
      double dphi = ev.grad.dot(dx);
      for (int j = 0; j < mi_; ++j) dphi -= mu * ds(j) / s(j);
      for (int i : lower_idx_) dphi -= mu * dx(i) / (x(i) - lb_(i));
      for (int i : upper_idx_) dphi += mu * dx(i) / (ub_(i) - x(i));
      if (cnorm > 1e-14) {
        const double rho_req = dphi / (0.5 * cnorm);
        if (rho_req > rho) rho = std::min(rho_req + 10.0, 1e12);
      }
      const double merit0 = ev.f + mu * barrier_term(x, s) + rho * cnorm;
      const double dmerit = dphi - rho * cnorm;

      double alpha = alpha_pr;
      bool accepted = false;
      VectorXd x_trial, s_trial, h_trial, g_trial;
      double f_trial = 0.0;
      while (alpha >= cfg_.min_step) {
        x_trial = x + alpha * dx;
        s_trial = s + alpha * ds;
        if (eval_values(x_trial, f_trial, h_trial, g_trial)) {
          const double c_trial =
              h_trial.lpNorm<1>() + (mi_ > 0 ? (g_trial + s_trial).lpNorm<1>() : 0.0);
          const double merit_trial =
              f_trial + mu * barrier_term(x_trial, s_trial) + rho * c_trial;
          if (merit_trial <= merit0 + cfg_.armijo_coefficient * alpha * dmerit) {
            accepted = true;
            break;
          }
        }
        alpha *= cfg_.step_shrink;
      }

      if (!accepted) {
        if (++consecutive_ls_failures >= 2) {
          res.status = SolverStatus::kNumericalFailure;
          return finish(res, x, lam, y, zl, zu, opt);
        }
        // Force fresh regularization next round and try again.
        delta_last = std::max(delta_last, 1e-4) * 100.0;
        continue;
      }
      consecutive_ls_failures = 0;

      x = x_trial;
      s = s_trial;
      lam += alpha * dlam;
      y += alpha_du * dy;
      for (int i : lower_idx_) zl(i) += alpha_du * dzl(i);
      for (int i : upper_idx_) zu(i) += alpha_du * dzu(i);

      // Dual safeguard: keep every complementarity product within a broad
      // band of mu so duals cannot run away from the primal iterates.
      constexpr double kSigma = 1e10;
      for (int j = 0; j < mi_; ++j)
        y(j) = std::clamp(y(j), mu / (kSigma * s(j)), kSigma * mu / s(j));
      for (int i : lower_idx_) {
        const double gap = x(i) - lb_(i);
        zl(i) = std::clamp(zl(i), mu / (kSigma * gap), kSigma * mu / gap);
      }
      for (int i : upper_idx_) {
        const double gap = ub_(i) - x(i);
        zu(i) = std::clamp(zu(i), mu / (kSigma * gap), kSigma * mu / gap);
      }

      if (cfg_.trace != nullptr) {
        *cfg_.trace << "iter " << iter << " mu " << mu << " f " << f_trial
                    << " stat " << opt.stationarity << " feas "
                    << opt.primal_feasibility << " compl " << opt.complementarity
                    << " alpha " << alpha << " delta " << delta_w << " rho " << rho
                    << '\n';
      }

      if (!eval_full(x, ev)) {
        res.status = SolverStatus::kNumericalFailure;
        return finish(res, x, lam, y, zl, zu, KktResiduals{});
      }
    }

    res.status = SolverStatus::kMaxIterations;
    const KktResiduals opt = optimality(x, ev, lam, y, zl, zu);
    return finish(res, x, lam, y, zl, zu, opt);
  }

  Multipliers unscale(const VectorXd& lam, const VectorXd& y, const VectorXd& zl,
                      const VectorXd& zu) const {
    Multipliers m;
    m.equality = lam.cwiseProduct(eq_scale_) / f_scale_;
    m.inequality = y.cwiseProduct(ineq_scale_) / f_scale_;
    m.bound_lower = zl / f_scale_;
    m.bound_upper = zu / f_scale_;
    return m;
  }

  SolverResult finish(SolverResult res, const VectorXd& x, const VectorXd& lam,
                      const VectorXd& y, const VectorXd& zl, const VectorXd& zu,
                      const KktResiduals& opt) const {
    res.solution = x;
    res.multipliers = unscale(lam, y, zl, zu);
    res.kkt = opt;
    return res;
  }

  const NlpProblem& p_;
  SolverConfig cfg_;
  int n_, me_, mi_;
  VectorXd lb_, ub_;
  std::vector<int> lower_idx_, upper_idx_;
  double f_scale_;
  VectorXd eq_scale_, ineq_scale_;
};

}  // namespace

const char* to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::kConverged: return "converged";
    case SolverStatus::kMaxIterations: return "max_iterations";
    case SolverStatus::kInfeasibleDetected: return "infeasible_detected";
    case SolverStatus::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

SolverStatus solver_status_from_string(const std::string& name) {
  if (name == "converged") return SolverStatus::kConverged;
  if (name == "max_iterations") return SolverStatus::kMaxIterations;
  if (name == "infeasible_detected") return SolverStatus::kInfeasibleDetected;
  if (name == "numerical_failure") return SolverStatus::kNumericalFailure;
  throw ConfigError("unknown solver status '" + name + "'");
}

double KktResiduals::max() const {
  return std::max({stationarity, primal_feasibility, complementarity});
}

double DerivativeReport::max() const {
  return std::max({objective_gradient_error, equality_jacobian_error,
                   inequality_jacobian_error});
}

SolverResult solve(const NlpProblem& problem, const VectorXd& initial_guess,
                   const SolverConfig& config) {
  IpSolver solver(problem, config);
  return solver.run(initial_guess);
}

KktResiduals kkt_residuals(const NlpProblem& problem, const VectorXd& point,
                           const Multipliers& multipliers) {
  const int n = problem.num_vars();
  const int me = problem.num_equalities();
  const int mi = problem.num_inequalities();
  if (point.size() != n) throw DimensionError("point size mismatch");

  const auto block_or_zero = [](const VectorXd& v, int size, const char* what) {
    if (v.size() == size) return v;
    if (v.size() == 0) return VectorXd(VectorXd::Zero(size));
    throw DimensionError(std::string("multiplier block '") + what + "' size mismatch");
  };
  const VectorXd lam = block_or_zero(multipliers.equality, me, "equality");
  const VectorXd mu = block_or_zero(multipliers.inequality, mi, "inequality");
  const VectorXd zl = block_or_zero(multipliers.bound_lower, n, "bound_lower");
  const VectorXd zu = block_or_zero(multipliers.bound_upper, n, "bound_upper");

  const VectorXd lb = problem.lower_bounds();
  const VectorXd ub = problem.upper_bounds();
  const VectorXd h = problem.equalities(point);
  const VectorXd g = problem.inequalities(point);

  KktResiduals r;
  VectorXd stat = problem.objective_gradient(point);
  if (me > 0) stat += problem.equality_jacobian(point).transpose() * lam;
  if (mi > 0) stat += problem.inequality_jacobian(point).transpose() * mu;
  stat -= zl;
  stat += zu;
  r.stationarity = inf_norm(stat);

  double primal = inf_norm(h);
  for (int j = 0; j < mi; ++j) primal = std::max(primal, g(j));
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(lb(i))) primal = std::max(primal, lb(i) - point(i));
    if (std::isfinite(ub(i))) primal = std::max(primal, point(i) - ub(i));
  }
  r.primal_feasibility = std::max(primal, 0.0);

  double compl_ = 0.0;
  for (int j = 0; j < mi; ++j) compl_ = std::max(compl_, std::abs(mu(j) * g(j)));
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(lb(i)))
      compl_ = std::max(compl_, std::abs(zl(i) * (point(i) - lb(i))));
    if (std::isfinite(ub(i)))
      compl_ = std::max(compl_, std::abs(zu(i) * (ub(i) - point(i))));
  }
  r.complementarity = compl_;
  return r;
}

DerivativeReport check_derivatives(const NlpProblem& problem, const VectorXd& point,
                                   double relative_step) {
  const int n = problem.num_vars();
  if (point.size() != n) throw DimensionError("point size mismatch");
  const int me = problem.num_equalities();
  const int mi = problem.num_inequalities();

  const auto rel_err = [](double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
  };

  DerivativeReport report;
  const VectorXd grad = problem.objective_gradient(point);
  const MatrixXd jh = problem.equality_jacobian(point);
  const MatrixXd jg = problem.inequality_jacobian(point);

  VectorXd xp = point, xm = point;
  for (int i = 0; i < n; ++i) {
    const double h = relative_step * std::max(1.0, std::abs(point(i)));
    xp(i) = point(i) + h;
    xm(i) = point(i) - h;

    const double fd_grad = (problem.objective(xp) - problem.objective(xm)) / (2.0 * h);
    report.objective_gradient_error =
        std::max(report.objective_gradient_error, rel_err(grad(i), fd_grad));

    if (me > 0) {
      const VectorXd col = (problem.equalities(xp) - problem.equalities(xm)) / (2.0 * h);
      for (int r = 0; r < me; ++r)
        report.equality_jacobian_error =
            std::max(report.equality_jacobian_error, rel_err(jh(r, i), col(r)));
    }
    if (mi > 0) {
      const VectorXd col =
          (problem.inequalities(xp) - problem.inequalities(xm)) / (2.0 * h);
      for (int r = 0; r < mi; ++r)
        report.inequality_jacobian_error =
            std::max(report.inequality_jacobian_error, rel_err(jg(r, i), col(r)));
    }

    xp(i) = point(i);
    xm(i) = point(i);
  }
  return report;
}

}  // namespace auvfleet
