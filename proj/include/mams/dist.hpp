#pragma once

namespace mams {

// Standard normal CDF. Absolute error below 1e-15 over the whole real line.
double std_normal_cdf(double x);

// Inverse standard normal CDF for p in (0,1). Throws std::invalid_argument
// otherwise. Relative error ~1e-15 (Wichura's rational approximation with a
// single Newton polish against std_normal_cdf).
double std_normal_quantile(double p);

// Student-t CDF with df >= 1 degrees of freedom, via the regularized
// incomplete beta function. Throws std::invalid_argument for df < 1.
double student_t_cdf(double x, int df);

// Student-t density, needed by the quantile Newton solver.
double student_t_pdf(double x, int df);

// Inverse Student-t CDF. Requires p in (0,1) and df >= 1; throws
// std::invalid_argument otherwise. The result x satisfies
// |F(x) - p| <= 1e-12 in probability.
double student_t_quantile(double p, int df);

namespace detail {
// Regularized incomplete beta I_x(a,b), continued-fraction evaluation.
double reg_inc_beta(double a, double b, double x);
}  // namespace detail

}  // namespace mams
