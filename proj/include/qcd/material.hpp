#pragma once

#include <string>

#include "qcd/errors.hpp"
#include "qcd/vec2.hpp"

namespace qcd {

// Scalar moduli of the hexagonal quasi-crystal constitutive law.
// All values are dimensionless; unit handling is the caller's business.
struct MaterialConstants {
  double C = 1.0;  // phonon modulus
  double K = 1.0;  // phason modulus
  double R = 0.0;  // phonon-phason coupling
};

struct StressPair {
  Vec2 sigma;  // phonon stress
  Vec2 rho;    // phason stress
};

inline bool is_admissible(const MaterialConstants& m) {
  // Strict inequalities, exact comparison on the inputs.
  return m.C > 0.0 && m.K > 0.0 && m.C * m.K - m.R * m.R > 0.0;
}

inline void validate(const MaterialConstants& m) {
  if (!(m.C > 0.0))
    fail(ErrorCode::NotPositiveDefinite, "C > 0 violated (C = " + std::to_string(m.C) + ")");
  if (!(m.K > 0.0))
    fail(ErrorCode::NotPositiveDefinite, "K > 0 violated (K = " + std::to_string(m.K) + ")");
  if (!(m.C * m.K - m.R * m.R > 0.0))
    fail(ErrorCode::NotPositiveDefinite,
         "C*K - R^2 > 0 violated (C*K - R^2 = " + std::to_string(m.C * m.K - m.R * m.R) + ")");
}

inline StressPair hooke(const MaterialConstants& m, Vec2 u, Vec2 w) {
  return {m.C * u + m.R * w, m.R * u + m.K * w};
}

// f = (C|u|^2 + K|w|^2 + 2R u.w) / 2; strictly positive unless u = w = 0.
inline double energy_density(const MaterialConstants& m, Vec2 u, Vec2 w) {
  return 0.5 * (m.C * norm2(u) + m.K * norm2(w) + 2.0 * m.R * dot(u, w));
}

// Quadratic form in the Burgers moduli that scales every energy piece:
// C*bu^2 + K*bw^2 + 2R*bu*bw.
inline double burgers_form(const MaterialConstants& m, double bu, double bw) {
  return m.C * bu * bu + m.K * bw * bw + 2.0 * m.R * bu * bw;
}

}  // namespace qcd
