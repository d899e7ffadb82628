#include "spa/pm/ebo.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace spa::pm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// e^{-z} + z - 1, with a series near zero.
double xi_s(double z) {
  if (std::abs(z) < 1e-3) return z * z * (0.5 - z * (1.0 / 6.0 - z / 24.0));
  return std::expm1(-z) + z;
}

// d/dz of z * xi(w / z) style perspective term: e^{-z}(1 + z) - 1.
double chi_s(double z) {
  if (std::abs(z) < 1e-3) return z * z * (-0.5 + z * (1.0 / 3.0 - z / 8.0));
  return std::expm1(-z) + z * std::exp(-z);
}

// Euclidean projection onto {p >= lb, sum p = 1}.
std::vector<double> project_shifted(const std::vector<double>& v, const std::vector<double>& lb) {
  const std::size_t k = v.size();
  const double r = 1.0 - std::accumulate(lb.begin(), lb.end(), 0.0);
  std::vector<double> y(k), s(k);
  for (std::size_t i = 0; i < k; ++i) y[i] = v[i] - lb[i];
  s = y;
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    cum += s[i];
    const double t = (cum - r) / static_cast<double>(i + 1);
    if (s[i] - t > 0.0) theta = t;
  }
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = lb[i] + std::max(0.0, y[i] - theta);
  return out;
}

class Objective {
 public:
  Objective(const PmGame& g, const GameGeometry& geo, const ProbVector& q, double eta, Model model)
      : g_(g), pareto_(geo.pareto), q_(q.vec()), eta_(eta), k_(g.k), d_(g.d) {
    np_ = model == Model::PMLocal ? k_ : 0;
    const auto syms = g.row_symbols();
    block_.assign(k_, std::vector<std::size_t>(g.alphabet_size(), 0));
    used_.assign(k_, std::vector<bool>(g.alphabet_size(), false));
    std::size_t next = np_;
    for (std::size_t a = 0; a < k_; ++a) {
      for (int s : syms[a]) {
        used_[a][static_cast<std::size_t>(s)] = true;
        block_[a][static_cast<std::size_t>(s)] = next;
        next += k_;
      }
    }
    n_ = next;
    if (np_) lb_ = pm_local_lower_bound(q);
  }

  std::size_t n() const { return n_; }
  std::size_t np() const { return np_; }
  const std::vector<double>& lb() const { return lb_; }

  std::size_t base(std::size_t a, std::size_t x) const {
    return block_[a][static_cast<std::size_t>(g_.Phi[a][x])];
  }

  Eigen::VectorXd pack(std::span<const double> p, const EstimatorG& G) const {
    Eigen::VectorXd th = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
    for (std::size_t a = 0; a < np_; ++a) th(static_cast<Eigen::Index>(a)) = p[a];
    const auto syms = g_.row_symbols();
    for (std::size_t a = 0; a < k_; ++a)
      for (int s : syms[a])
        for (std::size_t b = 0; b < k_; ++b)
          th(static_cast<Eigen::Index>(block_[a][static_cast<std::size_t>(s)] + b)) =
              G(a, static_cast<std::size_t>(s), b);
    return th;
  }

  void unpack(const Eigen::VectorXd& th, std::vector<double>& p, EstimatorG& G) const {
    p = np_ ? std::vector<double>(th.data(), th.data() + np_) : q_;
    G = EstimatorG(k_, g_.alphabet_size());
    const auto syms = g_.row_symbols();
    for (std::size_t a = 0; a < k_; ++a)
      for (int s : syms[a])
        for (std::size_t b = 0; b < k_; ++b)
          G(a, static_cast<std::size_t>(s), b) = th(static_cast<Eigen::Index>(block_[a][static_cast<std::size_t>(s)] + b));
  }

  // max over G entries of |eta step / p_a|
  double max_z_change(const Eigen::VectorXd& th, const Eigen::VectorXd& step) const {
    double worst = 0.0;
    for (std::size_t a = 0; a < k_; ++a) {
      const double pa = np_ ? th(static_cast<Eigen::Index>(a)) : q_[a];
      for (std::size_t s = 0; s < block_[a].size(); ++s) {
        if (!used(a, s)) continue;
        for (std::size_t b = 0; b < k_; ++b)
          worst = std::max(worst, std::abs(eta_ * step(static_cast<Eigen::Index>(block_[a][s] + b)) / pa));
      }
    }
    return worst;
  }

  struct Value {
    double smooth = kInf;
    double truth = kInf;
  };

  // tau = 0 evaluates the true objective only. kappa weights the barrier
  // keeping p strictly above its lower bound.
  Value eval(const Eigen::VectorXd& th, double tau, double kappa, Eigen::VectorXd* grad,
             Eigen::MatrixXd* hess) const {
    const auto n = static_cast<Eigen::Index>(n_);
    std::vector<double> p(k_);
    for (std::size_t a = 0; a < k_; ++a) p[a] = np_ ? th(static_cast<Eigen::Index>(a)) : q_[a];
    for (std::size_t a = 0; a < k_; ++a)
      if (!(p[a] > 0.0)) return {};
    const bool want = grad != nullptr && tau > 0.0;
    std::vector<double> gs(d_), gt(d_);
    Eigen::MatrixXd gx;
    std::vector<Eigen::MatrixXd> hx;
    if (want) gx = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(d_));
    if (want && hess) hx.assign(d_, Eigen::MatrixXd::Zero(n, n));
    std::vector<double> S(k_), pi(k_);
    const double eta = eta_;
    for (std::size_t x = 0; x < d_; ++x) {
      std::fill(S.begin(), S.end(), 0.0);
      for (std::size_t a = 0; a < k_; ++a) {
        const std::size_t bs = base(a, x);
        for (std::size_t b = 0; b < k_; ++b) S[b] += th(static_cast<Eigen::Index>(bs + b));
      }
      double lin = 0.0, bl = 0.0;
      for (std::size_t a = 0; a < k_; ++a) lin += (p[a] - q_[a]) * g_.L[a][x];
      for (std::size_t b = 0; b < k_; ++b) bl += q_[b] * (g_.L[b][x] - S[b]);
      double vmax = -kInf;
      for (std::size_t c : pareto_) vmax = std::max(vmax, S[c] - g_.L[c][x]);
      double ms = vmax / eta;
      std::fill(pi.begin(), pi.end(), 0.0);
      if (tau > 0.0) {
        double sum = 0.0;
        for (std::size_t c : pareto_) {
          pi[c] = std::exp((S[c] - g_.L[c][x] - vmax) / (eta * tau));
          sum += pi[c];
        }
        for (std::size_t c : pareto_) pi[c] /= sum;
        ms += tau * std::log(sum);
      }
      double psi = 0.0;
      for (std::size_t a = 0; a < k_; ++a) {
        const std::size_t bs = base(a, x);
        for (std::size_t b = 0; b < k_; ++b) {
          const double z = eta * th(static_cast<Eigen::Index>(bs + b)) / p[a];
          if (z < -500.0) return {};
          psi += p[a] * q_[b] * xi_s(z);
        }
      }
      psi /= eta * eta;
      gt[x] = (lin + bl) / eta + vmax / eta + psi;
      gs[x] = (lin + bl) / eta + ms + psi;
      if (!want) continue;

      auto col = gx.col(static_cast<Eigen::Index>(x));
      const double coef = 1.0 / (eta * eta * tau);
      for (std::size_t a = 0; a < k_; ++a) {
        const std::size_t bs = base(a, x);
        const auto ia = static_cast<Eigen::Index>(a);
        if (np_) col(ia) += g_.L[a][x] / eta;
        for (std::size_t b = 0; b < k_; ++b) {
          const auto ib = static_cast<Eigen::Index>(bs + b);
          const double z = eta * th(ib) / p[a];
          const double e = std::exp(-z);
          col(ib) = (pi[b] - q_[b] * e) / eta;
          if (np_) col(ia) += q_[b] * chi_s(z) / (eta * eta);
          if (!hess) continue;
          auto& H = hx[x];
          H(ib, ib) += q_[b] * e / p[a];
          if (np_) {
            const double off = -q_[b] * z * e / (eta * p[a]);
            H(ia, ib) += off;
            H(ib, ia) += off;
            H(ia, ia) += q_[b] * z * z * e / (eta * eta * p[a]);
          }
        }
      }
      if (hess) {
        auto& H = hx[x];
        for (std::size_t a = 0; a < k_; ++a)
          for (std::size_t a2 = 0; a2 < k_; ++a2) {
            const std::size_t b1 = base(a, x), b2 = base(a2, x);
            for (std::size_t c : pareto_)
              for (std::size_t e : pareto_)
                H(static_cast<Eigen::Index>(b1 + c), static_cast<Eigen::Index>(b2 + e)) +=
                    coef * (pi[c] * (c == e ? 1.0 : 0.0) - pi[c] * pi[e]);
          }
      }
    }

    Value v;
    v.truth = *std::max_element(gt.begin(), gt.end());
    if (tau <= 0.0) {
      v.smooth = v.truth;
      return v;
    }
    const double gmax = *std::max_element(gs.begin(), gs.end());
    std::vector<double> w(d_);
    double sum = 0.0;
    for (std::size_t x = 0; x < d_; ++x) sum += (w[x] = std::exp((gs[x] - gmax) / tau));
    for (auto& wx : w) wx /= sum;
    v.smooth = gmax + tau * std::log(sum);
    if (np_ && kappa > 0.0) {
      for (std::size_t a = 0; a < k_; ++a) {
        if (!(p[a] > lb_[a])) return {};
        v.smooth -= kappa * std::log(p[a] - lb_[a]);
      }
    }
    if (!want) return v;

    const Eigen::Map<const Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(d_));
    *grad = gx * wv;
    if (hess) {
      Eigen::MatrixXd& H = *hess;
      H = Eigen::MatrixXd::Zero(n, n);
      for (std::size_t x = 0; x < d_; ++x) H += w[x] * hx[x];
      H += (gx * wv.asDiagonal() * gx.transpose() - (*grad) * grad->transpose()) / tau;
    }
    if (np_ && kappa > 0.0) {
      for (std::size_t a = 0; a < k_; ++a) {
        const auto ia = static_cast<Eigen::Index>(a);
        const double gap = p[a] - lb_[a];
        (*grad)(ia) -= kappa / gap;
        if (hess) (*hess)(ia, ia) += kappa / (gap * gap);
      }
    }
    return v;
  }

 private:
  const PmGame& g_;
  std::vector<std::size_t> pareto_;
  std::vector<double> q_;
  std::vector<double> lb_;
  double eta_;
  std::size_t k_, d_, np_ = 0, n_ = 0;
  std::vector<std::vector<std::size_t>> block_;
  std::vector<std::vector<bool>> used_;

  bool used(std::size_t a, std::size_t s) const { return used_[a][s]; }
};

}  // namespace

std::vector<double> pm_local_lower_bound(const ProbVector& q) {
  std::vector<double> lb(q.size());
  for (std::size_t a = 0; a < q.size(); ++a) lb[a] = q[a] / (2.0 * static_cast<double>(q.size()));
  return lb;
}

double ebo_objective(const PmGame& game, const GameGeometry& geom, std::span<const double> p, const EstimatorG& G,
                     const ProbVector& q, double eta) {
  if (!(eta > 0.0)) throw DomainError("ebo_objective requires eta > 0");
  if (p.size() != game.k || q.size() != game.k) throw DomainError("ebo_objective: dimension mismatch");
  for (double pa : p)
    if (!(pa > 0.0)) throw DomainError("ebo_objective requires p > 0");
  // Evaluate in the PM-local layout so p is read from the argument.
  const Objective obj(game, geom, q, eta, Model::PMLocal);
  return obj.eval(obj.pack(p, G), 0.0, 0.0, nullptr, nullptr).truth;
}

EboResult ebo_solve(const PmGame& game, const GameGeometry& geom, const EstimatorG& g0, const ProbVector& q,
                    double eta, Model model, const EboOptions& opts, const EstimatorG* warm) {
  if (!(eta > 0.0)) throw DomainError("ebo_solve requires eta > 0");
  if (q.size() != game.k || !q.strictly_positive()) throw DomainError("ebo_solve requires q > 0 of size k");
  const Objective obj(game, geom, q, eta, model);
  const std::size_t np = obj.np();

  // Starts: G0, the caller's warm estimator, and G = 0 (always finite; G0
  // overflows when q is very skewed).
  const EstimatorG zero(game.k, game.alphabet_size());
  Eigen::VectorXd th;
  double best_val = kInf;
  for (const EstimatorG* cand : {&g0, warm, &zero}) {
    if (!cand) continue;
    const Eigen::VectorXd alt = obj.pack(q.values(), *cand);
    const double v = obj.eval(alt, 0.0, 0.0, nullptr, nullptr).truth;
    if (th.size() == 0 || v < best_val) {
      th = alt;
      best_val = v;
    }
  }
  Eigen::VectorXd best = th;

  const double spread = std::log(static_cast<double>(game.d)) +
                        std::log(static_cast<double>(std::max<std::size_t>(1, geom.pareto.size()))) + 1.0;
  double tau = 0.1 * std::clamp(std::abs(best_val), 0.1, 10.0);
  const double tau_min = opts.tol / spread;

  EboResult res{q, EstimatorG{}, 0.0, 0.0, 0, 0, 0.0, false};
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  double last_smooth_gap = 0.0;
  for (int stage = 0; stage < opts.max_stages; ++stage) {
    const double stage_start = best_val;
    const double kappa = 1e-3 * tau;
    for (int it = 0; it < opts.max_newton; ++it) {
      const auto cur = obj.eval(th, tau, kappa, &grad, &hess);
      ++res.iterations;
      if (!std::isfinite(cur.smooth)) break;
      // Jacobi scaling: curvature of G(a, .)_b is q_b / p_a and spans many
      // orders of magnitude once q is skewed.
      const Eigen::VectorXd D = hess.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
      Eigen::MatrixXd Hs = D.asDiagonal() * hess * D.asDiagonal();
      Hs.diagonal().array() += 1e-10;
      const Eigen::VectorXd gs = D.cwiseProduct(grad);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(Hs);
      Eigen::VectorXd step;
      if (ldlt.info() == Eigen::Success) {
        Eigen::VectorXd y = -ldlt.solve(gs);
        if (np) {
          // Keep sum p = 1: project the step onto the tangent space in the
          // Hessian metric.
          Eigen::VectorXd e = Eigen::VectorXd::Zero(grad.size());
          e.head(static_cast<Eigen::Index>(np)) = D.head(static_cast<Eigen::Index>(np));
          const Eigen::VectorXd He = ldlt.solve(e);
          y -= (e.dot(y) / e.dot(He)) * He;
        }
        step = D.cwiseProduct(y);
      }
      if (step.size() == 0 || !step.allFinite() || grad.dot(step) >= 0.0) {
        step = -D.cwiseProduct(gs);
        if (np) step.head(static_cast<Eigen::Index>(np)).array() -= step.head(static_cast<Eigen::Index>(np)).mean();
      }
      const double slope = grad.dot(step);
      if (-slope / 2.0 <= 1e-3 * opts.tol * std::max(1.0, std::abs(cur.smooth))) break;
      // Trust region in z = eta G / p: exp(-z) punishes overshooting.
      double s = std::min(1.0, 2.0 / std::max(1e-300, obj.max_z_change(th, step)));
      for (std::size_t a = 0; a < np; ++a) {
        const auto ia = static_cast<Eigen::Index>(a);
        if (step(ia) < 0.0) s = std::min(s, 0.99 * (th(ia) - obj.lb()[a]) / -step(ia));
      }
      bool moved = false;
      for (int ls = 0; ls < 80; ++ls, s *= 0.5) {
        const Eigen::VectorXd trial = th + s * step;
        const auto tv = obj.eval(trial, tau, kappa, nullptr, nullptr);
        if (tv.smooth <= cur.smooth + 0.25 * s * slope) {
          th = trial;
          moved = true;
          const double truth = obj.eval(th, 0.0, 0.0, nullptr, nullptr).truth;
          if (truth < best_val) {
            best_val = truth;
            best = th;
          }
          last_smooth_gap = truth - tv.smooth;
          break;
        }
      }
      if (!moved) break;
    }
    ++res.stages;
    const double improvement = stage_start - best_val;
    const bool fine = tau * spread <= 1e-4 * std::max(1.0, std::abs(best_val));
    if (tau <= tau_min || (stage > 0 && fine && improvement < opts.tol)) {
      res.converged = true;
      break;
    }
    tau *= opts.anneal;
  }

  std::vector<double> p;
  obj.unpack(best, p, res.G);
  if (np) p = project_shifted(p, obj.lb());
  res.p = ProbVector(p);
  const Eigen::VectorXd final_th = obj.pack(res.p.values(), res.G);
  res.opt_value = obj.eval(final_th, 0.0, 0.0, nullptr, nullptr).truth;
  res.vprime = std::max(0.0, res.opt_value);
  res.smoothing_gap = last_smooth_gap;
  return res;
}

}  // namespace spa::pm
