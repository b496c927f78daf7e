#pragma once

// MacKinnon (1994) response-surface coefficients for the asymptotic
// distribution of the Dickey-Fuller tau statistic, single series, regression
// with a constant and no trend. The p-value is Phi(poly(tau)) with the
// small-p polynomial below tau_star and the large-p polynomial above it.

namespace turmoil::data::mackinnon_1994 {

inline constexpr const char* kTableVersion = "mackinnon-1994/tau_c/N1/v1";

inline constexpr double kTauMax = 2.74;
inline constexpr double kTauMin = -18.83;
inline constexpr double kTauStar = -1.61;

// Coefficients in ascending powers of tau.
inline constexpr double kSmallP[] = {2.1659, 1.4412, 0.038269};
inline constexpr double kLargeP[] = {1.7339, 0.93202, -0.12745, -0.010368};

}  // namespace turmoil::data::mackinnon_1994
