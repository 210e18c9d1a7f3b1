#pragma once

// Special functions used by the distribution catalog. Everything that can
// underflow in a tail has a log-space counterpart.

namespace stein::special {

double log_gamma(double x);

//! exp(x^2) * erfc(x), accurate for large positive x
double erfcx(double x);

//! standard normal cdf / survival and their logs
double ndtr(double x);
double ndtr_c(double x);
double log_ndtr(double x);
double log_ndtr_c(double x);
double ndtri(double p);

//! regularized lower / upper incomplete gamma P(a,x), Q(a,x)
double gamma_p(double a, double x);
double gamma_q(double a, double x);
double log_gamma_p(double a, double x);
double log_gamma_q(double a, double x);

//! regularized incomplete beta I_x(a,b) and its log
double ibeta(double x, double a, double b);
double log_ibeta(double x, double a, double b);

// log(1 - exp(x)) for x <= 0
double log1mexp(double x);

}  // namespace stein::special
