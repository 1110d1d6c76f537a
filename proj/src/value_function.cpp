#include "wpcn/value_function.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace wpcn {

double sup_distance(const ValueFunction& a, const ValueFunction& b) {
  if (!(a.space() == b.space())) throw std::invalid_argument("value functions on different state spaces");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

bool action_feasible(const Action& a, const SystemParams& p, const std::array<double, 2>& battery,
                     double tol) {
  const double t_slack = tol * p.slot;
  if (a.tau1 < 0 || a.tau2 < 0 || a.tau_ap < -t_slack) return false;
  if (a.rho1 < 0 || a.rho2 < 0 || a.q1 < 0 || a.q2 < 0) return false;
  if (a.tau1 + a.tau2 + a.tau_ap > p.slot + t_slack) return false;
  if (a.q1 + a.q2 > p.q_max * (1.0 + tol)) return false;
  const double tau[2] = {a.tau1, a.tau2};
  const double rho[2] = {a.rho1, a.rho2};
  for (int i = 0; i < 2; ++i) {
    if (tau[i] * rho[i] > battery[i] * (1.0 + tol) + 1e-300) return false;
    if (tau[i] > 0.0) {
      if (rho[i] < p.dev[i].p_min * (1.0 - tol) || rho[i] > p.dev[i].p_max * (1.0 + tol)) return false;
    }
  }
  return true;
}

void write_value_function_csv(std::ostream& os, const ValueFunction& K) {
  os << "b1,b2,K\n";
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < K.size(); ++i) {
    const BatteryState b = K.space().state(i);
    os << b.b1 << ',' << b.b2 << ',' << K[i] << '\n';
  }
  os.precision(old);
}

void write_policy_csv(std::ostream& os, const Policy& policy) {
  os << "b1,b2,channel,tau1_s,tau2_s,tau_ap_s,rho1_W,rho2_W,q1_W,q2_W,e1,e2,c1,c2\n";
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t s = 0; s < policy.space().size(); ++s) {
    const BatteryState b = policy.space().state(s);
    for (std::size_t c = 0; c < policy.num_channels(); ++c) {
      const Decision& d = policy.at(s, c);
      const Action& a = d.action;
      os << b.b1 << ',' << b.b2 << ',' << c << ',' << a.tau1 << ',' << a.tau2 << ',' << a.tau_ap
         << ',' << a.rho1 << ',' << a.rho2 << ',' << a.q1 << ',' << a.q2 << ',' << d.spent[0]
         << ',' << d.spent[1] << ',' << d.harvested[0] << ',' << d.harvested[1] << '\n';
    }
  }
  os.precision(old);
}

}  // namespace wpcn
