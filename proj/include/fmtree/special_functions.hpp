#pragma once

namespace fmtree {

/// Standard normal CDF.
double normal_cdf(double z);

/// Inverse standard normal CDF for p in (0,1).
double normal_quantile(double p);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Two-sided p-value of a Student t statistic with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

} // namespace fmtree
