#pragma once

#include <span>

namespace heisen {

struct LaguerreCaps {
  int max_degree = 512;
  int max_order = 64;
};

// Generalized Laguerre polynomial L_m^{(p)}(t) by the three-term recurrence.
double laguerre(int m, int p, double t, const LaguerreCaps& caps = {});

// L_m^{(p)}(y) e^{-y/2}; safe for large y and m.
double weighted_laguerre(int m, int p, double y, const LaguerreCaps& caps = {});

// Fills out[k] = L_k^{(p)}(y) e^{-y/2} for k = 0 .. out.size()-1.
// No cap check; callers validate sizes once.
void weighted_laguerre_all(int p, double y, std::span<double> out);

// Calibrated constant for |L_m^{(p)}(y) e^{-y/2}| <= C_p (m+1)^p, with a
// factor 2 safety margin. Frozen for p <= 8, calibrated on demand above.
double laguerre_bound_constant(int p);

// Empirical sup over m <= m_max and sampled y in [0, y_max] of
// |L_m^{(p)}(y) e^{-y/2}| / (m+1)^p.
double calibrate_laguerre_bound(int p, int m_max = 512, double y_max = 1000.0,
                                int samples = 20000);

// Binomial coefficient C(n, k) as a double.
double binomial(int n, int k);

}  // namespace heisen
