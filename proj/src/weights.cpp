#include "cotrans/weights.hpp"

#include "cotrans/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cotrans {

namespace {

cd polyval(const std::vector<double> &c, cd s) {
  cd r = 0.0;
  for (double a : c)
    r = r * s + a;
  return r;
}

} // namespace

cd TransferFunction::eval(cd s) const { return polyval(num, s) / polyval(den, s); }

bool TransferFunction::is_zero() const {
  return std::all_of(num.begin(), num.end(), [](double a) { return a == 0.0; });
}

FrequencyResponse sample(const TransferFunction &G, const std::vector<double> &omega) {
  FrequencyResponse r{omega, {}};
  for (double w : omega)
    r.value.push_back(G.at(w));
  return r;
}

FrequencyResponse sample(const LinearSystem &G, const std::vector<double> &omega,
                         int out, int in) {
  FrequencyResponse r{omega, {}};
  for (double w : omega)
    r.value.push_back(G.freq_response(w)(out, in));
  return r;
}

std::vector<double> relative_error(const FrequencyResponse &nominal,
                                   const FrequencyResponse &actual) {
  if (nominal.value.size() != actual.value.size())
    throw DimensionMismatch("relative_error: sample count mismatch");
  std::vector<double> e(nominal.value.size());
  for (std::size_t i = 0; i < e.size(); ++i)
    e[i] = std::abs((actual.value[i] - nominal.value[i]) / nominal.value[i]);
  return e;
}

TransferFunction fit_relative_error(const std::vector<double> &omega,
                                    const std::vector<double> &rel_err,
                                    const WeightFitOptions &opt) {
  if (omega.size() != rel_err.size() || omega.empty())
    throw DimensionMismatch("fit: sample count mismatch");
  const double emax = *std::max_element(rel_err.begin(), rel_err.end());
  if (emax <= opt.zero_tolerance)
    return TransferFunction::constant(0.0);
  if (emax > opt.cap)
    throw FitInfeasible("relative error exceeds the admissible cap");

  const double floor = 1e-4 * emax;
  const double lo = omega.front() * 1e-2, hi = omega.back() * 1e2;
  const auto corners = log_grid(lo, hi, 61);
  std::vector<double> zeros{0.0};
  zeros.insert(zeros.end(), corners.begin(), corners.end());

  double best_cost = std::numeric_limits<double>::infinity();
  TransferFunction best = TransferFunction::constant(emax);
  {
    double cost = 0.0;
    for (double e : rel_err)
      cost += std::pow(std::log(emax / std::max(e, floor)), 2);
    best_cost = cost;
  }
  for (int order = 1; order <= opt.max_order; ++order) {
    for (double z : zeros) {
      for (double p : corners) {
        if (z == p)
          continue;
        // Shape magnitude h(w) = |(jw + z)/(jw + p)|^order.
        std::vector<double> h(omega.size());
        double k = 0.0;
        for (std::size_t i = 0; i < omega.size(); ++i) {
          h[i] = std::pow(std::abs(cd(z, omega[i]) / cd(p, omega[i])), order);
          if (h[i] <= 0.0) {
            k = std::numeric_limits<double>::infinity();
            break;
          }
          k = std::max(k, rel_err[i] / h[i]);
        }
        if (!std::isfinite(k) || k <= 0.0)
          continue;
        double cost = 0.0;
        for (std::size_t i = 0; i < omega.size(); ++i)
          cost += std::pow(std::log(k * h[i] / std::max(rel_err[i], floor)), 2);
        if (cost < best_cost) {
          best_cost = cost;
          std::vector<double> num{k}, den{1.0};
          for (int o = 0; o < order; ++o) {
            std::vector<double> nn(num.size() + 1, 0.0), dd(den.size() + 1, 0.0);
            for (std::size_t a = 0; a < num.size(); ++a) {
              nn[a] += num[a];
              nn[a + 1] += num[a] * z;
            }
            for (std::size_t a = 0; a < den.size(); ++a) {
              dd[a] += den[a];
              dd[a + 1] += den[a] * p;
            }
            num = nn;
            den = dd;
          }
          best = {num, den};
        }
      }
    }
  }
  return best;
}

TransferFunction fit_uncertainty_weight(const LinearSystem &G_nom,
                                        const FrequencyResponse &G_actual,
                                        const WeightFitOptions &opt) {
  const FrequencyResponse nom = sample(G_nom, G_actual.omega);
  return fit_relative_error(G_actual.omega, relative_error(nom, G_actual), opt);
}

TransferFunction PerformanceWeightConfig::transfer_function() const {
  const double w0 = std::sqrt(band_lo * band_hi);
  return {{gain, gain * 2.0 * zeta_num * w0, gain * w0 * w0},
          {1.0, 2.0 * zeta_den * w0, w0 * w0}};
}

cd performance_weight(double omega, const PerformanceWeightConfig &cfg) {
  return cfg.transfer_function().at(omega);
}

} // namespace cotrans
