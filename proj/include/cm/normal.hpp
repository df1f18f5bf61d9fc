#pragma once

namespace cm {

// Standard normal cdf via erfc, relative accuracy ~1e-15 on the whole axis.
double norm_cdf(double x);

// Standard normal pdf.
double norm_pdf(double x);

// Inverse standard normal cdf (Wichura's PPND16 rational approximation,
// refined by one Newton step). Accepts p in (0,1).
double norm_quantile(double p);

}  // namespace cm
