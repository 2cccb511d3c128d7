#include "autofocus/parallel.hpp"
#include "autofocus/solvers.hpp"

#include <cmath>
#include <stdexcept>

namespace autofocus {

CVec estimate_gains_per_frequency(const CVec& y, const CVec& ax, Index period) {
  if (y.size() != ax.size()) throw DimensionMismatch("gain estimate: length mismatch");
  if (period <= 0) period = y.size();
  if (period == 0 || y.size() % period != 0) throw DimensionMismatch("gain estimate: length is not a multiple of period");
  RVec power = RVec::Zero(period);
  CVec cross = CVec::Zero(period);
  for (Index k = 0; k < y.size(); ++k) {
    power[k % period] += std::norm(ax[k]);
    cross[k % period] += y[k] * std::conj(ax[k]);
  }
  const double eps = 1e-8 * power.maxCoeff();
  CVec g(y.size());
  for (Index k = 0; k < y.size(); ++k) {
    const double den = power[k % period] + eps;
    g[k] = den > 0.0 ? cross[k % period] / den : cplx(1.0, 0.0);
  }
  return g;
}

std::pair<CVec, double> estimate_gains_delay(const CVec& y, const CVec& ax, const FrequencyGrid& freqs,
                                             double max_delay, int samples) {
  const Index F = freqs.size();
  if (y.size() != ax.size() || F == 0 || y.size() % F != 0)
    throw DimensionMismatch("delay estimate: length mismatch");
  const Index n = y.size();
  if (samples < 2 || !(max_delay > 0.0)) throw std::invalid_argument("delay estimate: bad search grid");
  const double energy = ax.squaredNorm();
  if (!(energy > 0.0)) return {CVec::Ones(n), 0.0};

  CVec cross = CVec::Zero(F);
  for (Index k = 0; k < n; ++k) cross[k % F] += y[k] * std::conj(ax[k]);
  auto score = [&](double tau) {
    cplx acc{0.0, 0.0};
    for (Index k = 0; k < F; ++k) acc += cross[k] * std::polar(1.0, freqs.angular(static_cast<int>(k)) * tau);
    return std::abs(acc);
  };

  const double step = 2.0 * max_delay / (samples - 1);
  double best_tau = 0.0;
  double best = -1.0;
  for (int i = 0; i < samples; ++i) {
    const double tau = -max_delay + i * step;
    const double s = score(tau);
    if (s > best) {
      best = s;
      best_tau = tau;
    }
  }
  // Golden-section refinement within one grid cell on each side.
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = best_tau - step, b = best_tau + step;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double sc = score(c), sd = score(d);
  for (int it = 0; it < 60; ++it) {
    if (sc > sd) {
      b = d;
      d = c;
      sd = sc;
      c = b - phi * (b - a);
      sc = score(c);
    } else {
      a = c;
      c = d;
      sc = sd;
      d = a + phi * (b - a);
      sd = score(d);
    }
  }
  const double tau = score(0.5 * (a + b)) > best ? 0.5 * (a + b) : best_tau;

  CVec phase(n);
  for (Index k = 0; k < n; ++k) phase[k] = std::polar(1.0, -freqs.angular(static_cast<int>(k % F)) * tau);
  cplx num{0.0, 0.0};
  for (Index k = 0; k < n; ++k) num += y[k] * std::conj(phase[k] * ax[k]);
  const cplx gain = num / energy;
  return {CVec(gain * phase), tau};
}

BaselineResult baseline_measurement_domain(const MeasurementSet& measurements,
                                           const std::vector<OperatorPtr>& ops, double sparsity_weight,
                                           const BaselineOptions& opts) {
  measurements.validate();
  const int M = measurements.size();
  if (M < 2) throw std::invalid_argument("baseline: at least two pairs are required");
  if (static_cast<int>(ops.size()) != M) throw DimensionMismatch("baseline: operator count differs from pair count");
  if (!(sparsity_weight >= 0.0)) throw std::invalid_argument("baseline: sparsity weight must be non-negative");
  if (opts.outer_iters < 1 || opts.inner_iters < 1) throw std::invalid_argument("baseline: iteration counts");
  const Index N = ops[0]->cols();
  const Index F = measurements.freqs.size();
  for (int m = 0; m < M; ++m)
    if (ops[m]->cols() != N || ops[m]->rows() != measurements.y[m].size())
      throw DimensionMismatch("baseline: operator " + std::to_string(m) + " does not match data");
  const int threads = opts.threads;

  BaselineResult res;
  res.x = CVec::Zero(N);
  res.gains.resize(M);
  for (int m = 0; m < M; ++m) res.gains[m] = CVec::Ones(ops[m]->rows());

  // Weight relative to the smallest value that zeroes the solution.
  std::vector<CVec> back(M);
  parallel_for(M, threads, [&](int m) { back[m] = ops[m]->adjoint(measurements.y[m]); });
  CVec total = CVec::Zero(N);
  for (const auto& b : back) total += b;
  const double lambda = sparsity_weight * total.cwiseAbs().maxCoeff();

  for (int outer = 0; outer < opts.outer_iters; ++outer) {
    auto forward = [&](int m, const CVec& v) { return CVec(res.gains[m].cwiseProduct(ops[m]->apply(v))); };
    auto adjoint = [&](int m, const CVec& r) { return ops[m]->adjoint(res.gains[m].conjugate().cwiseProduct(r)); };
    auto gradient = [&](const CVec& v) {
      std::vector<CVec> parts(M);
      parallel_for(M, threads,
                   [&](int m) { parts[m] = adjoint(m, CVec(measurements.y[m] - forward(m, v))); });
      CVec g = CVec::Zero(N);
      for (const auto& p : parts) g += p;
      return g;
    };
    const double lip = power_iteration_norm(std::function<CVec(const CVec&)>([&](const CVec& v) {
                                              std::vector<CVec> parts(M);
                                              parallel_for(M, threads,
                                                           [&](int m) { parts[m] = adjoint(m, forward(m, v)); });
                                              CVec out = CVec::Zero(N);
                                              for (const auto& p : parts) out += p;
                                              return out;
                                            }),
                                            N);
    if (!(lip > 0.0)) break;
    const double alpha = 1.0 / lip;

    CVec u_prev = res.x, s = res.x;
    double q = 1.0;
    for (int t = 0; t < opts.inner_iters; ++t) {
      CVec u = soft_threshold(CVec(s + alpha * gradient(s)), alpha * lambda);
      const double q_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * q * q));
      s = u + ((q - 1.0) / q_next) * (u - u_prev);
      q = q_next;
      u_prev = std::move(u);
    }
    res.x = std::move(u_prev);

    res.delays.clear();
    std::vector<std::vector<double>> delays(M);
    parallel_for(M, threads, [&](int m) {
      const CVec ax = ops[m]->apply(res.x);
      const Index block = opts.per_position ? F : ax.size();
      CVec g(ax.size());
      for (Index start = 0; start < ax.size(); start += block) {
        const CVec yb = measurements.y[m].segment(start, block);
        const CVec ab = ax.segment(start, block);
        if (opts.gain_model == GainModel::per_frequency) {
          g.segment(start, block) = estimate_gains_per_frequency(yb, ab, F);
        } else {
          auto [gb, tau] = estimate_gains_delay(yb, ab, measurements.freqs, opts.max_delay, opts.delay_samples);
          g.segment(start, block) = gb;
          delays[m].push_back(tau);
        }
      }
      res.gains[m] = std::move(g);
    });
    for (const auto& d : delays) res.delays.insert(res.delays.end(), d.begin(), d.end());
  }
  return res;
}

}  // namespace autofocus
