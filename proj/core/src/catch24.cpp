// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0
//
// The 22 canonical time-series characteristics plus raw mean and raw
// population standard deviation. Exact conventions pinned here (the unit
// tests carry an independent brute-force implementation of the same
// definitions):
//
//  - Autocorrelation (CO_* and PD_* features): biased estimator with the
//    global series mean, acf[k] = sum(xc[i]*xc[i+k]) / sum(xc[i]^2),
//    computed via FFT.
//  - "First zero crossing" of an acf: smallest lag k >= 1 with acf[k] <= 0,
//    capped at the given maximum.
//  - Automutual information (IN_*): windowed Pearson correlation, each
//    window centered on its own mean.
//  - Histograms: equal-width bins over [min, max], index floor((x-min)/step)
//    clamped to the last bin.
//  - Quantiles: MATLAB convention (midpoint plotting positions with linear
//    interpolation).
//  - Welch spectrum: rectangular window over the whole mean-subtracted
//    series, NFFT = max(256, next_pow2(n)), one-sided PSD on an angular
//    frequency axis [0, pi], Fs = 2*pi.
//  - Spline detrend (PD_PeriodicityWang): least-squares cubic spline with a
//    single interior knot at the series midpoint.
//  - Features whose definition degenerates on the input return NaN and are
//    imputed to 0 with the nan_mask bit set.

#include "marmo/catch24.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "marmo/errors.hpp"
#include "marmo/fft.hpp"

namespace marmo::catch24 {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Series = std::span<const double>;

double mean_of(Series x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double sample_std(Series x) {
    if (x.size() < 2) return 0.0;
    const double m = mean_of(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

// MATLAB-style quantile: midpoint plotting positions, linear interpolation.
double quantile_sorted(const std::vector<double>& sorted, double p) {
    const auto n = static_cast<double>(sorted.size());
    const double pos = p * n + 0.5;
    if (pos <= 1.0) return sorted.front();
    if (pos >= n) return sorted.back();
    const auto k = static_cast<std::size_t>(pos); // floor, 1-based
    const double frac = pos - static_cast<double>(k);
    return sorted[k - 1] * (1.0 - frac) + sorted[k] * frac;
}

double median_sorted(const std::vector<double>& sorted) {
    const std::size_t n = sorted.size();
    if (n == 0) return kNaN;
    if (n % 2 == 1) return sorted[n / 2];
    return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

int first_zero_crossing(const std::vector<double>& acf, std::size_t max_tau) {
    const std::size_t stop = std::min(max_tau, acf.size() - 1);
    for (std::size_t k = 1; k <= stop; ++k) {
        if (acf[k] <= 0.0) return static_cast<int>(k);
    }
    return static_cast<int>(max_tau);
}

// --- distribution shape -----------------------------------------------------

double histogram_mode(Series x, int n_bins) {
    const auto [mn_it, mx_it] = std::minmax_element(x.begin(), x.end());
    const double mn = *mn_it, mx = *mx_it;
    if (!(mx > mn)) return kNaN;
    const double step = (mx - mn) / n_bins;
    std::vector<long> counts(static_cast<std::size_t>(n_bins), 0);
    for (double v : x) {
        auto b = static_cast<long>((v - mn) / step);
        b = std::clamp(b, 0L, static_cast<long>(n_bins - 1));
        ++counts[static_cast<std::size_t>(b)];
    }
    long best = -1;
    double center_sum = 0.0;
    int n_best = 0;
    for (int b = 0; b < n_bins; ++b) {
        const long c = counts[static_cast<std::size_t>(b)];
        const double center = mn + (b + 0.5) * step;
        if (c > best) {
            best = c;
            center_sum = center;
            n_best = 1;
        } else if (c == best) {
            center_sum += center;
            ++n_best;
        }
    }
    return center_sum / n_best;
}

// --- autocorrelation shape --------------------------------------------------

double f1ecac(const std::vector<double>& acf) {
    const double thresh = 1.0 / std::numbers::e;
    const std::size_t n = acf.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (acf[i + 1] < thresh) {
            const double slope = acf[i + 1] - acf[i];
            return static_cast<double>(i) + (thresh - acf[i]) / slope;
        }
    }
    return static_cast<double>(n);
}

double first_min_ac(const std::vector<double>& acf) {
    const std::size_t n = acf.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (acf[i] < acf[i - 1] && acf[i] < acf[i + 1]) return static_cast<double>(i);
    }
    return static_cast<double>(n);
}

// --- histogram automutual information ---------------------------------------

double histogram_ami_even_2_5(Series z) {
    constexpr std::size_t tau = 2;
    constexpr int n_bins = 5;
    const std::size_t n = z.size();
    if (n <= tau + 1) return kNaN;
    const auto [mn_it, mx_it] = std::minmax_element(z.begin(), z.end());
    const double lo = *mn_it - 0.1, hi = *mx_it + 0.1;
    const double step = (hi - lo) / n_bins;

    const std::size_t pairs = n - tau;
    double joint[n_bins][n_bins] = {};
    for (std::size_t i = 0; i < pairs; ++i) {
        auto b1 = static_cast<long>((z[i] - lo) / step);
        auto b2 = static_cast<long>((z[i + tau] - lo) / step);
        b1 = std::clamp(b1, 0L, static_cast<long>(n_bins - 1));
        b2 = std::clamp(b2, 0L, static_cast<long>(n_bins - 1));
        joint[b1][b2] += 1.0;
    }
    double pi[n_bins] = {}, pj[n_bins] = {};
    for (int a = 0; a < n_bins; ++a) {
        for (int b = 0; b < n_bins; ++b) {
            joint[a][b] /= static_cast<double>(pairs);
            pi[a] += joint[a][b];
            pj[b] += joint[a][b];
        }
    }
    double ami = 0.0;
    for (int a = 0; a < n_bins; ++a) {
        for (int b = 0; b < n_bins; ++b) {
            if (joint[a][b] > 0.0) ami += joint[a][b] * std::log(joint[a][b] / (pi[a] * pj[b]));
        }
    }
    return ami;
}

// --- simple temporal statistics ----------------------------------------------

double trev_1_num(Series z) {
    const std::size_t n = z.size();
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = z[i + 1] - z[i];
        s += d * d * d;
    }
    return s / static_cast<double>(n - 1);
}

double pnn40(Series z) {
    const std::size_t n = z.size();
    long count = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(z[i + 1] - z[i]) * 1000.0 > 40.0) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(n - 1);
}

double longstretch_above_mean(Series z) {
    const double m = mean_of(z);
    long best = 0, run = 0;
    for (double v : z) {
        if (v > m) {
            ++run;
            best = std::max(best, run);
        } else {
            run = 0;
        }
    }
    return static_cast<double>(best);
}

double longstretch_decreasing(Series z) {
    long best = 0, run = 0;
    for (std::size_t i = 0; i + 1 < z.size(); ++i) {
        if (z[i + 1] - z[i] < 0.0) {
            ++run;
            best = std::max(best, run);
        } else {
            run = 0;
        }
    }
    return static_cast<double>(best);
}

// --- symbolic dynamics --------------------------------------------------------

// 3-symbol coarse-graining by tertiles; symbol = 1 + #(thresholds below value).
std::vector<int> coarsegrain_quantile3(Series x) {
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const double t1 = quantile_sorted(sorted, 1.0 / 3.0);
    const double t2 = quantile_sorted(sorted, 2.0 / 3.0);
    std::vector<int> sym(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        int s = 1;
        if (x[i] > t1) ++s;
        if (x[i] > t2) ++s;
        sym[i] = s;
    }
    return sym;
}

double motif_three_quantile_hh(Series z) {
    const auto sym = coarsegrain_quantile3(z);
    const std::size_t pairs = sym.size() - 1;
    double p[3][3] = {};
    for (std::size_t i = 0; i < pairs; ++i) {
        p[sym[i] - 1][sym[i + 1] - 1] += 1.0;
    }
    double hh = 0.0;
    for (auto& row : p) {
        for (double& v : row) {
            v /= static_cast<double>(pairs);
            if (v > 0.0) hh -= v * std::log(v);
        }
    }
    return hh;
}

double transition_matrix_3ac_sumdiagcov(Series z, const std::vector<double>& acf) {
    const std::size_t n = z.size();
    const auto tau = static_cast<std::size_t>(first_zero_crossing(acf, n - 1));
    const std::size_t n_down = 1 + (n - 1) / tau;
    if (n_down < 3) return kNaN;
    std::vector<double> down(n_down);
    for (std::size_t i = 0; i < n_down; ++i) down[i] = z[i * tau];

    const auto sym = coarsegrain_quantile3(down);
    double t[3][3] = {};
    for (std::size_t i = 0; i + 1 < n_down; ++i) {
        t[sym[i] - 1][sym[i + 1] - 1] += 1.0;
    }
    for (auto& row : t) {
        for (double& v : row) v /= static_cast<double>(n_down - 1);
    }
    // sum of the variances of the matrix columns (rows as observations,
    // sample covariance with n-1 = 2)
    double out = 0.0;
    for (int j = 0; j < 3; ++j) {
        const double m = (t[0][j] + t[1][j] + t[2][j]) / 3.0;
        double var = 0.0;
        for (int r = 0; r < 3; ++r) var += (t[r][j] - m) * (t[r][j] - m);
        out += var / 2.0;
    }
    return out;
}

// --- periodicity (Wang) --------------------------------------------------------

// Least-squares cubic spline with one interior knot at the midpoint;
// truncated power basis {1, t, t^2, t^3, (t - tm)^3_+}.
std::vector<double> spline_detrend_residual(Series z) {
    const std::size_t n = z.size();
    const double tm = 0.5 * static_cast<double>(n - 1);
    constexpr int kBasis = 5;
    double ata[kBasis][kBasis] = {};
    double atb[kBasis] = {};
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i);
        const double u = t - tm;
        const double b[kBasis] = {1.0, t, t * t, t * t * t, u > 0.0 ? u * u * u : 0.0};
        for (int a = 0; a < kBasis; ++a) {
            for (int c = 0; c < kBasis; ++c) ata[a][c] += b[a] * b[c];
            atb[a] += b[a] * z[i];
        }
    }
    // Gaussian elimination with partial pivoting
    double coef[kBasis] = {};
    {
        double m[kBasis][kBasis + 1];
        for (int r = 0; r < kBasis; ++r) {
            for (int c = 0; c < kBasis; ++c) m[r][c] = ata[r][c];
            m[r][kBasis] = atb[r];
        }
        for (int col = 0; col < kBasis; ++col) {
            int piv = col;
            for (int r = col + 1; r < kBasis; ++r) {
                if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
            }
            std::swap(m[piv], m[col]);
            if (m[col][col] == 0.0) return {}; // singular; caller degenerates
            for (int r = col + 1; r < kBasis; ++r) {
                const double f = m[r][col] / m[col][col];
                for (int c = col; c <= kBasis; ++c) m[r][c] -= f * m[col][c];
            }
        }
        for (int r = kBasis - 1; r >= 0; --r) {
            double s = m[r][kBasis];
            for (int c = r + 1; c < kBasis; ++c) s -= m[r][c] * coef[c];
            coef[r] = s / m[r][r];
        }
    }
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i);
        const double u = t - tm;
        const double fit = coef[0] + coef[1] * t + coef[2] * t * t + coef[3] * t * t * t +
                           coef[4] * (u > 0.0 ? u * u * u : 0.0);
        resid[i] = z[i] - fit;
    }
    return resid;
}

double periodicity_wang(Series z) {
    constexpr double th = 0.01;
    const std::size_t n = z.size();
    const auto resid = spline_detrend_residual(z);
    if (resid.empty()) return kNaN;
    const auto acf = fft::autocorrelation(resid);
    const auto acmax = static_cast<std::size_t>(std::ceil(static_cast<double>(n) / 3.0));
    if (acmax + 1 > acf.size() || acmax < 3) return 1.0;

    std::vector<std::size_t> troughs, peaks;
    for (std::size_t tau = 2; tau + 1 <= acmax; ++tau) {
        const double slope_in = acf[tau] - acf[tau - 1];
        const double slope_out = acf[tau + 1] - acf[tau];
        if (slope_in < 0.0 && slope_out > 0.0) troughs.push_back(tau);
        else if (slope_in > 0.0 && slope_out < 0.0) peaks.push_back(tau);
    }
    for (const std::size_t p : peaks) {
        // nearest preceding trough
        std::size_t t = 0;
        for (const std::size_t tr : troughs) {
            if (tr < p) t = tr;
            else break;
        }
        if (t == 0) continue;
        if (acf[p] - acf[t] < th) continue;
        if (acf[p] < 0.0) continue;
        return static_cast<double>(p);
    }
    return 1.0;
}

// --- 2-d embedding distances -----------------------------------------------------

double embed2_dist_expfit_meandiff(Series z, const std::vector<double>& acf) {
    const std::size_t n = z.size();
    auto tau = static_cast<std::size_t>(first_zero_crossing(acf, n));
    if (tau > n / 10) tau = n / 10;
    if (tau < 1) tau = 1;
    if (n < tau + 2) return kNaN;
    const std::size_t m = n - tau - 1;
    std::vector<double> d(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double dx = z[i + 1] - z[i];
        const double dy = z[i + tau + 1] - z[i + tau];
        d[i] = std::sqrt(dx * dx + dy * dy);
    }
    const double l = mean_of(d);
    if (!(l > 0.0)) return kNaN;

    // Scott's rule binning of the distance distribution
    const double s = sample_std(d);
    const auto [mn_it, mx_it] = std::minmax_element(d.begin(), d.end());
    const double mn = *mn_it, mx = *mx_it;
    if (!(s > 1e-10) || !(mx > mn)) return kNaN;
    const double scott_w = 3.5 * s / std::cbrt(static_cast<double>(m));
    const auto n_bins = static_cast<int>(std::ceil((mx - mn) / scott_w));
    if (n_bins < 1) return kNaN;

    std::vector<long> counts(static_cast<std::size_t>(n_bins), 0);
    const double step = (mx - mn) / n_bins;
    for (double v : d) {
        auto b = static_cast<long>((v - mn) / step);
        b = std::clamp(b, 0L, static_cast<long>(n_bins - 1));
        ++counts[static_cast<std::size_t>(b)];
    }
    double out = 0.0;
    for (int b = 0; b < n_bins; ++b) {
        const double density =
            static_cast<double>(counts[static_cast<std::size_t>(b)]) / (static_cast<double>(m) * step);
        const double center = mn + (b + 0.5) * step;
        const double expfit = std::exp(-center / l) / l;
        out += std::abs(density - expfit);
    }
    return out / n_bins;
}

// --- gaussian automutual information ----------------------------------------------

double ami_gaussian_fmmi(Series z) {
    const std::size_t n = z.size();
    auto tau_max = static_cast<std::size_t>(40);
    const auto half = static_cast<std::size_t>(std::ceil(static_cast<double>(n) / 2.0));
    tau_max = std::min(tau_max, half);
    if (tau_max < 1) return kNaN;

    std::vector<double> ami(tau_max + 1, 0.0); // 1-based lags
    for (std::size_t lag = 1; lag <= tau_max; ++lag) {
        const std::size_t m = n - lag;
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            mx += z[i];
            my += z[i + lag];
        }
        mx /= static_cast<double>(m);
        my /= static_cast<double>(m);
        double sxy = 0.0, sxx = 0.0, syy = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double a = z[i] - mx;
            const double b = z[i + lag] - my;
            sxy += a * b;
            sxx += a * a;
            syy += b * b;
        }
        const double denom = std::sqrt(sxx * syy);
        if (!(denom > 0.0)) {
            ami[lag] = std::numeric_limits<double>::infinity();
            continue;
        }
        const double rho = sxy / denom;
        const double one_minus = 1.0 - rho * rho;
        ami[lag] = one_minus > 0.0 ? -0.5 * std::log(one_minus)
                                   : std::numeric_limits<double>::infinity();
    }
    for (std::size_t lag = 2; lag + 1 <= tau_max; ++lag) {
        if (ami[lag] < ami[lag - 1] && ami[lag] < ami[lag + 1]) return static_cast<double>(lag);
    }
    return static_cast<double>(tau_max);
}

// --- local mean forecasting ---------------------------------------------------------

std::vector<double> local_mean_residuals(Series z, std::size_t window) {
    const std::size_t n = z.size();
    if (n <= window) return {};
    std::vector<double> res(n - window);
    double acc = 0.0;
    for (std::size_t i = 0; i < window; ++i) acc += z[i];
    for (std::size_t i = 0; i + window < n; ++i) {
        res[i] = z[i + window] - acc / static_cast<double>(window);
        acc += z[i + window] - z[i];
    }
    return res;
}

double local_simple_mean1_tauresrat(Series z, const std::vector<double>& acf_z) {
    const auto res = local_mean_residuals(z, 1);
    if (res.size() < 2) return kNaN;
    const auto acf_res = fft::autocorrelation(res);
    const int tau_res = first_zero_crossing(acf_res, res.size());
    const int tau_y = first_zero_crossing(acf_z, z.size());
    return static_cast<double>(tau_res) / static_cast<double>(tau_y);
}

double local_simple_mean3_stderr(Series z) {
    const auto res = local_mean_residuals(z, 3);
    if (res.size() < 2) return kNaN;
    return sample_std(res);
}

// --- outlier inclusion ---------------------------------------------------------------

double outlier_include_mdrmd(Series raw, int sign) {
    constexpr double inc = 0.01;
    const std::size_t n = raw.size();
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = sign * raw[i];
    const double top = *std::max_element(w.begin(), w.end());
    if (top < inc) return 0.0;

    const auto n_thresh = static_cast<std::size_t>(top / inc) + 1;
    std::vector<double> med_rel(n_thresh, kNaN); // median position / (n/2) - 1
    std::vector<double> pct(n_thresh, 0.0);      // 100 * (count-1) / n
    std::vector<double> positions;               // 1-based
    for (std::size_t j = 0; j < n_thresh; ++j) {
        const double thr = static_cast<double>(j) * inc;
        positions.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (w[i] >= thr) positions.push_back(static_cast<double>(i + 1));
        }
        if (positions.empty()) continue;
        pct[j] = 100.0 * static_cast<double>(positions.size() - 1) / static_cast<double>(n);
        med_rel[j] = median_sorted(positions) / (static_cast<double>(n) / 2.0) - 1.0;
    }
    // keep thresholds up to the last one where more than 2% of spacings remain
    std::size_t last = n_thresh;
    for (std::size_t j = n_thresh; j-- > 0;) {
        if (pct[j] > 2.0) {
            last = j;
            break;
        }
    }
    if (last == n_thresh) return kNaN;
    std::vector<double> kept(med_rel.begin(), med_rel.begin() + static_cast<long>(last) + 1);
    std::sort(kept.begin(), kept.end());
    return median_sorted(kept);
}

// --- rectangular-window welch spectrum -------------------------------------------------

struct WelchSpectrum {
    std::vector<double> psd;   // one-sided
    std::vector<double> omega; // [0, pi]
    double domega = 0.0;
};

WelchSpectrum welch_rect(Series z) {
    const std::size_t n = z.size();
    const std::size_t n_fft = std::max<std::size_t>(256, fft::next_pow2(n));
    const double m = mean_of(z);
    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i) centered[i] = z[i] - m;
    const auto mag = fft::magnitude_spectrum(centered, n_fft);

    WelchSpectrum s;
    const std::size_t n_w = n_fft / 2 + 1;
    s.psd.resize(n_w);
    s.omega.resize(n_w);
    const double fs = 2.0 * std::numbers::pi;
    s.domega = fs / static_cast<double>(n_fft);
    for (std::size_t k = 0; k < n_w; ++k) {
        double p = mag[k] * mag[k] / (fs * static_cast<double>(n));
        if (k != 0 && k != n_w - 1) p *= 2.0;
        s.psd[k] = p;
        s.omega[k] = s.domega * static_cast<double>(k);
    }
    return s;
}

double welch_area_5_1(const WelchSpectrum& s) {
    const auto upto = static_cast<std::size_t>(
        std::ceil(static_cast<double>(s.psd.size()) / 5.0));
    double area = 0.0;
    for (std::size_t k = 0; k < upto; ++k) area += s.psd[k];
    return area * s.domega;
}

double welch_centroid(const WelchSpectrum& s) {
    double total = 0.0;
    for (double p : s.psd) total += p;
    if (!(total > 0.0)) return kNaN;
    double cum = 0.0;
    for (std::size_t k = 0; k < s.psd.size(); ++k) {
        cum += s.psd[k];
        if (cum > total / 2.0) return s.omega[k];
    }
    return s.omega.back();
}

// --- fluctuation analysis ----------------------------------------------------------------

double fluct_anal_prop_r1(Series z, bool dfa, std::size_t lag) {
    // walk = cumulative sum of the lag-subsampled series
    std::vector<double> walk;
    walk.reserve(z.size() / lag + 1);
    double acc = 0.0;
    for (std::size_t i = 0; i < z.size(); i += lag) {
        acc += z[i];
        walk.push_back(acc);
    }
    const std::size_t n = walk.size();
    if (n < 10) return 0.0;
    const auto tau_hi = static_cast<double>(n / 2);
    if (tau_hi < 5.0) return 0.0;

    // 50 log-spaced window sizes in [5, n/2], rounded, deduplicated
    std::vector<std::size_t> taus;
    const double lo = std::log(5.0), hi = std::log(tau_hi);
    for (int i = 0; i < 50; ++i) {
        const double t = std::exp(lo + (hi - lo) * static_cast<double>(i) / 49.0);
        const auto r = static_cast<std::size_t>(std::llround(t));
        if (taus.empty() || taus.back() != r) taus.push_back(r);
    }
    const std::size_t ntt = taus.size();
    if (ntt < 12) return 0.0;

    std::vector<double> log_tau(ntt), log_f(ntt);
    for (std::size_t it = 0; it < ntt; ++it) {
        const std::size_t tau = taus[it];
        const std::size_t n_buf = n / tau;
        double accum = 0.0;
        for (std::size_t b = 0; b < n_buf; ++b) {
            const double* y = walk.data() + b * tau;
            // linear least squares over t = 0..tau-1
            const double tn = static_cast<double>(tau);
            const double t_mean = (tn - 1.0) / 2.0;
            double y_mean = 0.0;
            for (std::size_t t = 0; t < tau; ++t) y_mean += y[t];
            y_mean /= tn;
            double sty = 0.0, stt = 0.0;
            for (std::size_t t = 0; t < tau; ++t) {
                const double dt = static_cast<double>(t) - t_mean;
                sty += dt * (y[t] - y_mean);
                stt += dt * dt;
            }
            const double slope = stt > 0.0 ? sty / stt : 0.0;
            if (dfa) {
                for (std::size_t t = 0; t < tau; ++t) {
                    const double e = y[t] - (y_mean + slope * (static_cast<double>(t) - t_mean));
                    accum += e * e;
                }
            } else {
                double emin = std::numeric_limits<double>::infinity();
                double emax = -std::numeric_limits<double>::infinity();
                for (std::size_t t = 0; t < tau; ++t) {
                    const double e = y[t] - (y_mean + slope * (static_cast<double>(t) - t_mean));
                    emin = std::min(emin, e);
                    emax = std::max(emax, e);
                }
                const double range = emax - emin;
                accum += range * range;
            }
        }
        const double denom = dfa ? static_cast<double>(n_buf * tau) : static_cast<double>(n_buf);
        const double f = std::sqrt(accum / denom);
        if (!(f > 0.0)) return kNaN;
        log_tau[it] = std::log(static_cast<double>(tau));
        log_f[it] = std::log(f);
    }

    // two-regime change point in the log-log plot: minimize the sum of the
    // residual norms of separate linear fits on [0, i) and [i-1, ntt)
    const auto fit_norm = [&](std::size_t a, std::size_t b) { // [a, b)
        const double m = static_cast<double>(b - a);
        double tx = 0.0, ty = 0.0;
        for (std::size_t i = a; i < b; ++i) {
            tx += log_tau[i];
            ty += log_f[i];
        }
        tx /= m;
        ty /= m;
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = a; i < b; ++i) {
            sxy += (log_tau[i] - tx) * (log_f[i] - ty);
            sxx += (log_tau[i] - tx) * (log_tau[i] - tx);
        }
        const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
        double sse = 0.0;
        for (std::size_t i = a; i < b; ++i) {
            const double e = log_f[i] - (ty + slope * (log_tau[i] - tx));
            sse += e * e;
        }
        return std::sqrt(sse);
    };

    constexpr std::size_t min_points = 6;
    double best = std::numeric_limits<double>::infinity();
    std::size_t break_pt = 0; // 1-based count of points in the first regime
    for (std::size_t i = min_points; i + min_points <= ntt; ++i) {
        const double err = fit_norm(0, i) + fit_norm(i - 1, ntt);
        if (err < best) {
            best = err;
            break_pt = i;
        }
    }
    if (break_pt == 0) return 0.0;
    return static_cast<double>(break_pt) / static_cast<double>(ntt);
}

} // namespace

const std::array<std::string_view, kNumFeatures>& feature_names() {
    static const std::array<std::string_view, kNumFeatures> names = {
        "DN_HistogramMode_5",
        "DN_HistogramMode_10",
        "CO_f1ecac",
        "CO_FirstMin_ac",
        "CO_HistogramAMI_even_2_5",
        "CO_trev_1_num",
        "MD_hrv_classic_pnn40",
        "SB_BinaryStats_mean_longstretch1",
        "SB_TransitionMatrix_3ac_sumdiagcov",
        "PD_PeriodicityWang_th0_01",
        "CO_Embed2_Dist_tau_d_expfit_meandiff",
        "IN_AutoMutualInfoStats_40_gaussian_fmmi",
        "FC_LocalSimple_mean1_tauresrat",
        "DN_OutlierInclude_p_001_mdrmd",
        "DN_OutlierInclude_n_001_mdrmd",
        "SP_Summaries_welch_rect_area_5_1",
        "SB_BinaryStats_diff_longstretch0",
        "SB_MotifThree_quantile_hh",
        "SC_FluctAnal_2_rsrangefit_50_1_logi_prop_r1",
        "SC_FluctAnal_2_dfa_50_1_2_logi_prop_r1",
        "SP_Summaries_welch_rect_centroid",
        "FC_LocalSimple_mean3_stderr",
        "DN_Mean",
        "DN_Spread_Std",
    };
    return names;
}

SeriesStats series_stats(std::span<const double> x) {
    SeriesStats s;
    s.n = x.size();
    if (x.empty()) return s;
    s.mean = mean_of(x);
    double acc = 0.0;
    for (double v : x) acc += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(acc / static_cast<double>(x.size()));
    return s;
}

ZScoreResult zscore_series(std::span<const double> x) {
    if (x.size() < 2) throw DataError("zscore_series: need at least two samples");
    const SeriesStats s = series_stats(x);
    ZScoreResult out;
    out.values.resize(x.size());
    if (s.stddev == 0.0) {
        out.degenerate = true;
        std::fill(out.values.begin(), out.values.end(), 0.0);
        return out;
    }
    for (std::size_t i = 0; i < x.size(); ++i) out.values[i] = (x[i] - s.mean) / s.stddev;
    return out;
}

FeatureVector compute_catch24(std::span<const double> series) {
    if (series.size() < kMinSeriesLength) {
        throw DataError("compute_catch24: series shorter than " +
                        std::to_string(kMinSeriesLength) + " samples (" +
                        std::to_string(series.size()) + ")");
    }
    for (double v : series) {
        if (!std::isfinite(v)) throw DataError("compute_catch24: non-finite input sample");
    }

    const SeriesStats raw_stats = series_stats(series);
    FeatureVector out;
    out.values[22] = raw_stats.mean;
    out.values[23] = raw_stats.stddev;

    const ZScoreResult zr = zscore_series(series);
    if (zr.degenerate) {
        for (int i = 0; i < 22; ++i) {
            out.values[static_cast<std::size_t>(i)] = 0.0;
            out.nan_mask[static_cast<std::size_t>(i)] = true;
        }
        return out;
    }
    const Series z(zr.values);
    const auto acf = fft::autocorrelation(z);
    const auto welch = welch_rect(z);

    double v[22];
    v[0] = histogram_mode(z, 5);
    v[1] = histogram_mode(z, 10);
    v[2] = f1ecac(acf);
    v[3] = first_min_ac(acf);
    v[4] = histogram_ami_even_2_5(z);
    v[5] = trev_1_num(z);
    v[6] = pnn40(z);
    v[7] = longstretch_above_mean(z);
    v[8] = transition_matrix_3ac_sumdiagcov(z, acf);
    v[9] = periodicity_wang(z);
    v[10] = embed2_dist_expfit_meandiff(z, acf);
    v[11] = ami_gaussian_fmmi(z);
    v[12] = local_simple_mean1_tauresrat(z, acf);
    v[13] = outlier_include_mdrmd(series, +1);
    v[14] = outlier_include_mdrmd(series, -1);
    v[15] = welch_area_5_1(welch);
    v[16] = longstretch_decreasing(z);
    v[17] = motif_three_quantile_hh(z);
    v[18] = fluct_anal_prop_r1(z, /*dfa=*/false, /*lag=*/1);
    v[19] = fluct_anal_prop_r1(z, /*dfa=*/true, /*lag=*/2);
    v[20] = welch_centroid(welch);
    v[21] = local_simple_mean3_stderr(z);

    for (int i = 0; i < 22; ++i) {
        if (std::isfinite(v[i])) {
            out.values[static_cast<std::size_t>(i)] = v[i];
        } else {
            out.values[static_cast<std::size_t>(i)] = 0.0;
            out.nan_mask[static_cast<std::size_t>(i)] = true;
        }
    }
    return out;
}

FeatureVector compute_catch24(const Waveform& w) {
    return compute_catch24(std::span<const double>(w.samples));
}

} // namespace marmo::catch24
