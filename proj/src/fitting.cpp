#include "gkpft/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <utility>

namespace gkpft {

namespace {

using Objective = std::function<double(const std::vector<double>&)>;

struct NmResult {
  std::vector<double> x;
  double value = 0.0;
};

// Plain Nelder-Mead with the standard reflection/expansion/contraction/
// shrink coefficients. Dimensions here are at most three, so the per-step
// sort is irrelevant.
NmResult nelder_mead(const Objective& f, std::vector<double> x0,
                     std::vector<double> steps, int max_iter, double ftol) {
  const int n = static_cast<int>(x0.size());
  std::vector<std::vector<double>> p(n + 1, x0);
  std::vector<double> y(n + 1);
  for (int i = 1; i <= n; ++i) p[i][i - 1] += steps[i - 1];
  for (int i = 0; i <= n; ++i) y[i] = f(p[i]);

  std::vector<int> order(n + 1);
  for (int iter = 0; iter < max_iter; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return y[a] < y[b]; });
    const int best = order[0];
    const int second = order[n - 1];
    const int worst = order[n];
    if (y[worst] - y[best] <= ftol * std::max(1.0, std::abs(y[best]))) break;

    std::vector<double> centroid(n, 0.0);
    for (int i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (int k = 0; k < n; ++k) centroid[k] += p[i][k] / n;
    }
    auto blend = [&](double towards) {
      std::vector<double> x(n);
      for (int k = 0; k < n; ++k) {
        x[k] = centroid[k] + towards * (centroid[k] - p[worst][k]);
      }
      return x;
    };
    const std::vector<double> xr = blend(1.0);
    const double yr = f(xr);
    if (yr < y[best]) {
      const std::vector<double> xe = blend(2.0);
      const double ye = f(xe);
      if (ye < yr) {
        p[worst] = xe;
        y[worst] = ye;
      } else {
        p[worst] = xr;
        y[worst] = yr;
      }
    } else if (yr < y[second]) {
      p[worst] = xr;
      y[worst] = yr;
    } else {
      const std::vector<double> xc = blend(yr < y[worst] ? 0.5 : -0.5);
      const double yc = f(xc);
      if (yc < std::min(yr, y[worst])) {
        p[worst] = xc;
        y[worst] = yc;
      } else {
        for (int i = 0; i <= n; ++i) {  // shrink toward the best vertex
          if (i == best) continue;
          for (int k = 0; k < n; ++k) {
            p[i][k] = p[best][k] + 0.5 * (p[i][k] - p[best][k]);
          }
          y[i] = f(p[i]);
        }
      }
    }
  }
  const int best = static_cast<int>(
      std::min_element(y.begin(), y.end()) - y.begin());
  return {p[best], y[best]};
}

// Two refinement passes with shrinking simplexes sharpen the optimum enough
// for the closure tests.
NmResult nelder_mead_polished(const Objective& f, std::vector<double> x0,
                              std::vector<double> steps) {
  NmResult r = nelder_mead(f, std::move(x0), steps, 2000, 1e-14);
  for (int pass = 0; pass < 2; ++pass) {
    for (auto& s : steps) s *= 0.05;
    r = nelder_mead(f, r.x, steps, 1500, 1e-15);
  }
  return r;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

void require_single_setting(const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("no rows to fit");
  for (const auto& row : rows) {
    if (row.prep_mode != rows.front().prep_mode ||
        row.p_swap != rows.front().p_swap) {
      throw std::invalid_argument(
          "fit expects rows of a single preparation setting");
    }
  }
}

struct FitPoint {
  double d = 0.0;
  double eps = 0.0;
  double rate = 0.0;
  double sigma = 1.0;
};

}  // namespace

double scaling_t_of_epsilon(double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::domain_error("noise variance must be positive");
  }
  return std::erfc(std::sqrt(M_PI) / (2.0 * std::sqrt(2.0 * epsilon)));
}

double eval_scaling(double epsilon, int distance,
                    const ScalingParams& params) {
  if (distance < 1) throw std::invalid_argument("distance must be >= 1");
  if (!(params.t > 0.0 && params.t < 1.0 && params.a > 0.0 &&
        params.nu > 0.0 && params.mu > 0.0)) {
    throw std::invalid_argument("scaling parameters out of range");
  }
  const double g = scaling_t_of_epsilon(epsilon);
  const double base = params.t - g;
  if (base < 0.0) {
    throw std::domain_error("noise lies above the modeled threshold");
  }
  const double y = base * std::pow(distance, 1.0 / params.nu);
  return 0.143 * std::exp(-params.a * std::pow(y, params.mu));
}

ThresholdFit fit_threshold(const std::vector<SweepRow>& rows) {
  require_single_setting(rows);

  // curve per distance: eps -> (rate, trials), last row wins on duplicates
  std::map<int, std::map<double, std::pair<double, int>>> curves;
  for (const auto& row : rows) {
    curves[row.distance][row.epsilon] = {row.rate, row.n_trials};
  }
  if (curves.size() < 3) {
    throw std::invalid_argument("need at least three distances");
  }
  {
    std::set<double> eps_seen;
    for (const auto& row : rows) eps_seen.insert(row.epsilon);
    if (eps_seen.size() < 5) {
      throw std::invalid_argument("need at least five noise values");
    }
  }

  // Visual crossing: interpolated sign changes of rate differences between
  // consecutive distances, on the shared part of the grid.
  std::vector<double> crossings;
  for (auto it = curves.begin(); std::next(it) != curves.end(); ++it) {
    const auto& lo = it->second;
    const auto& hi = std::next(it)->second;
    std::vector<std::pair<double, double>> diff;  // eps, P_hi - P_lo
    for (const auto& [eps, rn] : lo) {
      const auto found = hi.find(eps);
      if (found != hi.end()) {
        diff.emplace_back(eps, found->second.first - rn.first);
      }
    }
    for (std::size_t k = 0; k + 1 < diff.size(); ++k) {
      const auto [e0, y0] = diff[k];
      const auto [e1, y1] = diff[k + 1];
      if (y0 == 0.0) crossings.push_back(e0);
      if ((y0 < 0.0 && y1 > 0.0) || (y0 > 0.0 && y1 < 0.0)) {
        crossings.push_back(e0 + (e1 - e0) * (-y0) / (y1 - y0));
      }
    }
  }
  if (crossings.empty()) {
    throw NoCrossingError(
        "failure-rate curves do not cross inside the sampled noise range");
  }
  const double eps0 = median(crossings);

  std::vector<FitPoint> pts;
  for (const auto& [d, curve] : curves) {
    for (const auto& [eps, rn] : curve) {
      if (std::abs(eps - eps0) > 0.30 * eps0) continue;
      const auto [rate, trials] = rn;
      FitPoint p;
      p.d = d;
      p.eps = eps;
      p.rate = rate;
      p.sigma = std::max(std::sqrt(rate * (1.0 - rate) / trials),
                         0.5 / trials);
      pts.push_back(p);
    }
  }
  if (pts.size() < 8) {
    throw std::invalid_argument("too few points near the crossing");
  }

  // Weighted quadratic in x = (eps - eps_th) d^(1/nu): linear solve for the
  // polynomial, outer search over (eps_th, log nu).
  Eigen::Vector3d abc = Eigen::Vector3d::Zero();
  auto chi2_of = [&pts, &abc](double eps_th, double nu) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    for (const auto& p : pts) {
      const double x = (p.eps - eps_th) * std::pow(p.d, 1.0 / nu);
      const Eigen::Vector3d row(1.0, x, x * x);
      const double w = 1.0 / (p.sigma * p.sigma);
      m += w * row * row.transpose();
      v += w * p.rate * row;
    }
    abc = m.ldlt().solve(v);
    double chi2 = 0.0;
    for (const auto& p : pts) {
      const double x = (p.eps - eps_th) * std::pow(p.d, 1.0 / nu);
      const double fit = abc[0] + abc[1] * x + abc[2] * x * x;
      const double r = (p.rate - fit) / p.sigma;
      chi2 += r * r;
    }
    return chi2;
  };

  const NmResult opt = nelder_mead_polished(
      [&](const std::vector<double>& th) {
        return chi2_of(th[0], std::exp(th[1]));
      },
      {eps0, 0.0}, {0.02 * eps0, 0.15});

  ThresholdFit fit;
  fit.epsilon_th = opt.x[0];
  fit.nu = std::exp(opt.x[1]);
  fit.chi2 = chi2_of(fit.epsilon_th, fit.nu);  // also refreshes abc
  fit.a = abc[0];
  fit.b = abc[1];
  fit.c = abc[2];
  fit.n_points = static_cast<int>(pts.size());
  fit.window_center = eps0;

  // Profile standard error: re-optimize nu at eps_th +- h and read the
  // curvature of chi^2 (delta-chi^2 = 1 rule).
  const double h = std::max(1e-6, 2e-3 * std::abs(fit.epsilon_th));
  auto profile = [&](double eps_th) {
    return nelder_mead(
               [&](const std::vector<double>& th) {
                 return chi2_of(eps_th, std::exp(th[0]));
               },
               {opt.x[1]}, {0.05}, 400, 1e-12)
        .value;
  };
  const double curvature =
      (profile(fit.epsilon_th + h) - 2.0 * fit.chi2 +
       profile(fit.epsilon_th - h)) /
      (h * h);
  fit.stderr_epsilon = curvature > 0.0 ? std::sqrt(2.0 / curvature) : 0.0;
  return fit;
}

ScalingFit fit_scaling(const std::vector<SweepRow>& rows) {
  require_single_setting(rows);

  struct Obs {
    double d, g, target;  // target = log 0.143 - log rate = a y^mu
  };
  std::vector<Obs> obs;
  std::set<int> distances;
  double g_max = 0.0;
  for (const auto& row : rows) {
    if (row.n_failures < 10) continue;  // too noisy for a log-scale fit
    const double g = scaling_t_of_epsilon(row.epsilon);
    obs.push_back({static_cast<double>(row.distance), g,
                   std::log(0.143) - std::log(row.rate)});
    distances.insert(row.distance);
    g_max = std::max(g_max, g);
  }
  if (obs.size() < 4 || distances.size() < 2) {
    throw std::invalid_argument("insufficient data for the scaling fit");
  }

  // theta = (log(t - g_max), log nu, log mu); the amplitude a is linear in
  // the transformed model and solved in closed form.
  double a_best = 0.0;
  auto objective = [&](const std::vector<double>& th) {
    const double t = g_max + std::exp(th[0]);
    const double nu = std::exp(th[1]);
    const double mu = std::exp(th[2]);
    if (!(t < 1.0) || nu > 50.0 || mu > 10.0 || mu < 0.05) return 1e12;
    double num = 0.0;
    double den = 0.0;
    for (const auto& o : obs) {
      const double ymu = std::pow((t - o.g) * std::pow(o.d, 1.0 / nu), mu);
      num += ymu * o.target;
      den += ymu * ymu;
    }
    if (!(den > 0.0)) return 1e12;
    const double a = num / den;
    if (!(a > 0.0)) return 1e12;
    double rss = 0.0;
    for (const auto& o : obs) {
      const double ymu = std::pow((t - o.g) * std::pow(o.d, 1.0 / nu), mu);
      const double r = a * ymu - o.target;
      rss += r * r;
    }
    a_best = a;
    return rss;
  };

  NmResult best{{}, 1e300};
  for (const double t_factor : {0.1, 0.5, 2.0, 8.0}) {
    for (const double mu0 : {1.0, 1.4}) {
      const NmResult r = nelder_mead_polished(
          objective, {std::log(g_max * t_factor), 0.0, std::log(mu0)},
          {0.5, 0.2, 0.2});
      if (r.value < best.value) best = r;
    }
  }
  const double rss = objective(best.x);  // refreshes a_best

  ScalingFit fit;
  fit.params.t = g_max + std::exp(best.x[0]);
  fit.params.a = a_best;
  fit.params.nu = std::exp(best.x[1]);
  fit.params.mu = std::exp(best.x[2]);
  fit.rss = rss;
  fit.n_points = static_cast<int>(obs.size());
  return fit;
}

}  // namespace gkpft
