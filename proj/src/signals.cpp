#include "esncast/signals.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "esncast/kernels.hpp"
#include "esncast/linalg.hpp"

namespace esncast {

StandardizedWindow standardize_returns(const ReturnPanel& filled, int row_begin, int row_end) {
    const int rows = row_end - row_begin;
    const int N = filled.N();
    if (rows < 2) throw DataError("standardize_returns: window too short");

    StandardizedWindow win;
    win.L = Matrix(rows, N);
    win.mean.assign(static_cast<size_t>(N), 0.0);
    win.stddev.assign(static_cast<size_t>(N), 0.0);
    win.retained.assign(static_cast<size_t>(N), 0);
    win.obs_count.assign(static_cast<size_t>(N), 0);

    for (int i = 0; i < N; ++i) {
        int n = 0;
        double s = 0.0;
        for (int r = row_begin; r < row_end; ++r) {
            if (!filled.missing(r, i)) {
                s += filled.value(r, i);
                ++n;
            }
        }
        win.obs_count[static_cast<size_t>(i)] = n;
        if (n < 2) continue;
        const double mu = s / n;
        double ss = 0.0;
        for (int r = row_begin; r < row_end; ++r) {
            if (!filled.missing(r, i)) {
                const double d = filled.value(r, i) - mu;
                ss += d * d;
            }
        }
        const double sd = std::sqrt(ss / (n - 1));
        win.mean[static_cast<size_t>(i)] = mu;
        win.stddev[static_cast<size_t>(i)] = sd;
        // Zero-variance stocks carry no cross-sectional information and
        // would divide by zero; they are excluded for this window.
        if (!(sd > std::abs(mu) * 1e-12 + 1e-300)) continue;
        win.retained[static_cast<size_t>(i)] = 1;
        ++win.n_retained;
        for (int r = row_begin; r < row_end; ++r) {
            if (!filled.missing(r, i)) {
                win.L.at(r - row_begin, i) = (filled.value(r, i) - mu) / sd;
            }
        }
    }
    return win;
}

EigenportfolioSet extract_factors(const StandardizedWindow& win, const ReturnPanel& filled,
                                  int row_begin, int row_end, int J) {
    const int N = static_cast<int>(win.retained.size());
    const int rows = row_end - row_begin;
    const int nr = win.n_retained;
    if (J < 1) throw ConfigError("extract_factors: J must be >= 1");
    if (J > nr) {
        throw DataError("extract_factors: J = " + std::to_string(J) + " exceeds " +
                        std::to_string(nr) + " retained stocks");
    }

    std::vector<int> keep;
    keep.reserve(static_cast<size_t>(nr));
    for (int i = 0; i < N; ++i) {
        if (win.retained[static_cast<size_t>(i)]) keep.push_back(i);
    }

    // Correlation of standardized returns, rho = L'L / (T-1).
    Matrix rho(nr, nr);
    for (int a = 0; a < nr; ++a) {
        for (int b = a; b < nr; ++b) {
            double s = 0.0;
            for (int r = 0; r < rows; ++r) {
                s += win.L.at(r, keep[static_cast<size_t>(a)]) *
                     win.L.at(r, keep[static_cast<size_t>(b)]);
            }
            const double v = s / (rows - 1);
            if (!std::isfinite(v)) {
                throw DataError("extract_factors: non-finite correlation between stocks " +
                                std::to_string(keep[static_cast<size_t>(a)]) + " and " +
                                std::to_string(keep[static_cast<size_t>(b)]));
            }
            rho.at(a, b) = v;
            rho.at(b, a) = v;
        }
    }

    std::vector<double> eigenvalues;
    Matrix vectors;
    symmetric_eigen(rho, eigenvalues, vectors);

    double trace = 0.0;
    for (double ev : eigenvalues) {
        if (ev < -1e-10) {
            throw InternalError("extract_factors: eigenvalue " + std::to_string(ev) +
                                " below symmetric-solver tolerance");
        }
        trace += ev;
    }

    EigenportfolioSet ep;
    ep.J = J;
    ep.eigenvalues = eigenvalues;
    ep.retained = win.retained;
    ep.weights = Matrix(N, J);
    ep.explained_variance_ratio.resize(static_cast<size_t>(J));

    for (int j = 0; j < J; ++j) {
        // Sign convention: column sums to a non-negative value.
        double colsum = 0.0;
        for (int a = 0; a < nr; ++a) colsum += vectors.at(a, j);
        double sign = 1.0;
        if (colsum < 0.0) {
            sign = -1.0;
        } else if (colsum == 0.0) {
            for (int a = 0; a < nr; ++a) {
                if (vectors.at(a, j) != 0.0) {
                    sign = vectors.at(a, j) > 0.0 ? 1.0 : -1.0;
                    break;
                }
            }
        }
        for (int a = 0; a < nr; ++a) {
            const int i = keep[static_cast<size_t>(a)];
            ep.weights.at(i, j) = sign * vectors.at(a, j) / win.stddev[static_cast<size_t>(i)];
        }
        ep.explained_variance_ratio[static_cast<size_t>(j)] =
            trace > 0 ? eigenvalues[static_cast<size_t>(j)] / trace : 0.0;
    }

    // Eigenportfolio returns over the window, F[t,j] = sum_i Q[i,j] r[t,i].
    ep.factor_returns = Matrix(rows, J);
    for (int r = 0; r < rows; ++r) {
        for (int j = 0; j < J; ++j) {
            double s = 0.0;
            for (int a = 0; a < nr; ++a) {
                const int i = keep[static_cast<size_t>(a)];
                if (!filled.missing(row_begin + r, i)) {
                    s += ep.weights.at(i, j) * filled.value(row_begin + r, i);
                }
            }
            ep.factor_returns.at(r, j) = s;
        }
    }
    return ep;
}

FactorRegression factor_regression(const ReturnPanel& filled, const EigenportfolioSet& ep,
                                   int row_begin, int row_end) {
    const int N = filled.N();
    const int rows = row_end - row_begin;
    const int J = ep.J;
    const int p = J + 1;

    FactorRegression reg;
    reg.drift_a.assign(static_cast<size_t>(N), 0.0);
    reg.loadings = Matrix(N, J);
    reg.residuals = Matrix(rows, N);
    reg.fitted.assign(static_cast<size_t>(N), 0);
    reg.flagged.assign(static_cast<size_t>(N), 0);

    std::vector<double> x(static_cast<size_t>(p));
    for (int i = 0; i < N; ++i) {
        if (!ep.retained[static_cast<size_t>(i)]) continue;
        Matrix G(p, p);
        std::vector<double> rhs(static_cast<size_t>(p), 0.0);
        int n = 0;
        for (int r = 0; r < rows; ++r) {
            if (filled.missing(row_begin + r, i)) continue;
            x[0] = 1.0;
            for (int j = 0; j < J; ++j) x[static_cast<size_t>(j) + 1] = ep.factor_returns.at(r, j);
            kernels::rank1_update(G.data(), x.data(), static_cast<size_t>(p));
            kernels::axpy(filled.value(row_begin + r, i), x.data(), rhs.data(),
                          static_cast<size_t>(p));
            ++n;
        }
        if (n <= p) continue;  // window too short for this stock
        Matrix Gc = G;
        std::vector<double> beta = rhs;
        if (!cholesky_solve_inplace(Gc, beta)) {
            beta = pinv_solve(G, rhs);
            reg.flagged[static_cast<size_t>(i)] = 1;
        }
        reg.drift_a[static_cast<size_t>(i)] = beta[0];
        for (int j = 0; j < J; ++j) {
            reg.loadings.at(i, j) = beta[static_cast<size_t>(j) + 1];
        }
        reg.fitted[static_cast<size_t>(i)] = 1;
        for (int r = 0; r < rows; ++r) {
            if (filled.missing(row_begin + r, i)) continue;
            double fit = beta[0];
            for (int j = 0; j < J; ++j) {
                fit += beta[static_cast<size_t>(j) + 1] * ep.factor_returns.at(r, j);
            }
            reg.residuals.at(r, i) = filled.value(row_begin + r, i) - fit;
        }
    }
    return reg;
}

OuEstimate ou_estimate(std::span<const double> residuals, int P, double drift_a) {
    const int n = static_cast<int>(residuals.size());
    if (P < 0) throw ConfigError("ou_estimate: P must be >= 0");
    if (n < P + 2) throw DataError("ou_estimate: need at least P + 2 residuals");

    OuEstimate est;
    est.P = P;
    est.drift_a = drift_a;

    // U[t] = sum_{s=t-P..t} resid[s]; the span yields n - P values.
    const int nu = n - P;
    double prev = 0.0;
    for (int s = 0; s < P + 1; ++s) prev += residuals[static_cast<size_t>(s)];

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    double u = prev;
    double u_last = prev;
    for (int t = 1; t < nu; ++t) {
        const double next =
            u + residuals[static_cast<size_t>(P + t)] - residuals[static_cast<size_t>(t - 1)];
        sx += u;
        sy += next;
        sxx += u * u;
        sxy += u * next;
        syy += next * next;
        u = next;
        u_last = next;
    }
    est.u_last = u_last;

    const int pairs = nu - 1;
    const double den = pairs * sxx - sx * sx;
    if (!(den > 0.0) || !std::isfinite(den)) return est;  // degenerate regressor
    const double cu = (pairs * sxy - sx * sy) / den;
    const double c0 = (sy - cu * sx) / pairs;
    est.cu = cu;
    est.c0 = c0;
    // Unusable outside (0, 1); the margin guards m = c0/(1-cu) against
    // blow-up when cu sits at 1 to rounding error.
    if (!(cu > 0.0) || !(cu < 1.0 - 1e-10)) return est;

    est.kappa = -std::log(cu);
    est.m = c0 / (1.0 - cu);
    const double syy_c = syy - sy * sy / pairs;
    const double sxy_c = sxy - sx * sy / pairs;
    const double rss = syy_c - cu * sxy_c;
    if (pairs < 2) return est;
    const double var_eta = std::max(rss, 0.0) / (pairs - 1);
    est.sigma_eq = std::sqrt(var_eta / (2.0 * est.kappa));
    if (!(est.sigma_eq > 0.0) || !std::isfinite(est.sigma_eq) || !std::isfinite(est.m)) {
        return est;
    }
    est.valid = true;
    return est;
}

std::optional<double> modified_z_score(const OuEstimate& est, double u_current) {
    if (!est.valid) return std::nullopt;
    const double z = (u_current - est.m) / est.sigma_eq;
    return z - est.drift_a / (est.kappa * est.sigma_eq);
}

namespace {

struct DayModel {
    bool present = false;
    EigenportfolioSet ep;
    FactorRegression reg;
};

}  // namespace

SignalPanel build_signal_panel(const ReturnPanel& raw, const SignalConfig& cfg,
                               SignalDiagnostics* diag, int jobs) {
    if (cfg.windows.empty()) throw ConfigError("signal config: empty window list");
    for (int w : cfg.windows) {
        if (w < 1) throw ConfigError("signal config: windows must be >= 1");
    }
    if (cfg.ou_window < 3) throw ConfigError("signal config: ou_window must be >= 3");

    const ReturnPanel filled = forward_fill_returns(raw);
    const int N = raw.N();
    const int n_days = raw.cal.n_days();
    const int D = static_cast<int>(cfg.windows.size());
    const int max_p = *std::max_element(cfg.windows.begin(), cfg.windows.end());

    SignalPanel sp;
    sp.cal = raw.cal;
    sp.tickers = raw.tickers;
    sp.windows = cfg.windows;
    sp.z.assign(static_cast<size_t>(sp.n_slots()) * N * D, 0.0);
    sp.missing.assign(static_cast<size_t>(sp.n_slots()) * N, 1);

    SignalDiagnostics local;
    SignalDiagnostics& dg = diag != nullptr ? *diag : local;
    dg = SignalDiagnostics{};

    if (n_days <= cfg.pca_window_days) {
        dg.missing_history = static_cast<long>(sp.missing.size());
        return sp;
    }

    // Daily two-step models, estimated each morning on the trailing window.
    std::vector<DayModel> models(static_cast<size_t>(n_days));
    const int T = raw.T();
    Matrix resid(T, N);                 // causal residual series, stitched daily
    std::vector<uint8_t> resid_ok(static_cast<size_t>(T) * N, 0);

    for (int d = cfg.pca_window_days; d < n_days; ++d) {
        const int row_begin = (d - cfg.pca_window_days) * Grid::kRowsPerDay;
        const int row_end = d * Grid::kRowsPerDay;
        StandardizedWindow win = standardize_returns(filled, row_begin, row_end);
        if (win.n_retained < cfg.factors) {
            dg.excluded_stock_days += N;
            continue;  // no model today; signals stay missing
        }
        dg.excluded_stock_days += N - win.n_retained;
        DayModel& model = models[static_cast<size_t>(d)];
        model.ep = extract_factors(win, filled, row_begin, row_end, cfg.factors);
        model.reg = factor_regression(filled, model.ep, row_begin, row_end);
        model.present = true;

        // Out-of-window residuals for today's rows from today's model.
        const int J = cfg.factors;
        std::vector<double> f(static_cast<size_t>(J));
        for (int r = d * Grid::kRowsPerDay; r < (d + 1) * Grid::kRowsPerDay; ++r) {
            for (int j = 0; j < J; ++j) {
                double s = 0.0;
                for (int i = 0; i < N; ++i) {
                    if (model.ep.retained[static_cast<size_t>(i)] && !filled.missing(r, i)) {
                        s += model.ep.weights.at(i, j) * filled.value(r, i);
                    }
                }
                f[static_cast<size_t>(j)] = s;
            }
            for (int i = 0; i < N; ++i) {
                if (!model.reg.fitted[static_cast<size_t>(i)] || filled.missing(r, i)) continue;
                double fit = model.reg.drift_a[static_cast<size_t>(i)];
                for (int j = 0; j < J; ++j) {
                    fit += model.reg.loadings.at(i, j) * f[static_cast<size_t>(j)];
                }
                resid.at(r, i) = filled.value(r, i) - fit;
                resid_ok[static_cast<size_t>(r) * N + i] = 1;
            }
        }
    }

    // Emission: per stock, walk the grid keeping the last row whose residual
    // is unavailable; a slot needs a contiguous residual history of
    // ou_window + P rows for its largest window.
    const int need = cfg.ou_window + max_p;
    std::vector<SignalDiagnostics> per_stock(static_cast<size_t>(N));

    parallel_for(N, jobs, [&](int i) {
        SignalDiagnostics& sd = per_stock[static_cast<size_t>(i)];
        std::vector<double> hist;
        int last_bad = -1;
        std::vector<OuEstimate> ests(static_cast<size_t>(D));
        for (int r = 0; r < T; ++r) {
            if (!resid_ok[static_cast<size_t>(r) * N + i]) last_bad = r;
            const int j = TradingCalendar::row_in_day(r);
            if (j >= Grid::kSlotsPerDay) continue;  // close mark is not a slot
            const int d = TradingCalendar::day_of_row(r);
            const int slot = sp.cal.slot_index(d, j);
            if (!models[static_cast<size_t>(d)].present ||
                !models[static_cast<size_t>(d)].reg.fitted[static_cast<size_t>(i)]) {
                ++sd.missing_history;
                continue;
            }
            if (raw.no_price(r, i)) {
                ++sd.missing_price;
                continue;
            }
            if (last_bad > r - need) {
                ++sd.missing_history;
                continue;
            }
            const double a_i = models[static_cast<size_t>(d)].reg.drift_a[static_cast<size_t>(i)];
            hist.resize(static_cast<size_t>(need));
            for (int s = 0; s < need; ++s) {
                hist[static_cast<size_t>(s)] = resid.at(r - need + 1 + s, i);
            }
            bool all_valid = true;
            for (int c = 0; c < D; ++c) {
                const int P = cfg.windows[static_cast<size_t>(c)];
                // Trailing slice sized so the AR(1) sees exactly ou_window points.
                const int len = cfg.ou_window + P;
                std::span<const double> tail(hist.data() + (need - len), static_cast<size_t>(len));
                ests[static_cast<size_t>(c)] = ou_estimate(tail, P, a_i);
                if (!ests[static_cast<size_t>(c)].valid) {
                    all_valid = false;
                    break;
                }
            }
            if (!all_valid) {
                ++sd.invalid_ou;
                continue;
            }
            for (int c = 0; c < D; ++c) {
                const OuEstimate& est = ests[static_cast<size_t>(c)];
                sp.z[sp.zidx(slot, i, c)] = *modified_z_score(est, est.u_last);
            }
            sp.missing[sp.midx(slot, i)] = 0;
            ++sd.emitted;
        }
    });

    for (const auto& sd : per_stock) {
        dg.emitted += sd.emitted;
        dg.missing_price += sd.missing_price;
        dg.missing_history += sd.missing_history;
        dg.invalid_ou += sd.invalid_ou;
    }
    return sp;
}

// --- serialization -----------------------------------------------------

namespace {
constexpr char kSignalMagic[8] = {'E', 'S', 'N', 'S', 'I', 'G', '0', '1'};

void put_u32(std::ofstream& out, uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
uint32_t get_u32(std::ifstream& in) {
    uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
}  // namespace

void write_signals_csv(const SignalPanel& sp, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << "time,ticker";
    for (int w : sp.windows) out << ",z" << w;
    out << ",missing\n";
    char buf[64];
    for (int slot = 0; slot < sp.n_slots(); ++slot) {
        const std::string ts = format_timestamp(sp.cal.timestamp_of_slot(slot));
        for (int i = 0; i < sp.N(); ++i) {
            out << ts << ',' << sp.tickers[static_cast<size_t>(i)];
            const bool miss = sp.is_missing(slot, i);
            for (int c = 0; c < sp.D(); ++c) {
                if (miss) {
                    out << ',';
                } else {
                    std::snprintf(buf, sizeof buf, "%.17g", sp.z[sp.zidx(slot, i, c)]);
                    out << ',' << buf;
                }
            }
            out << ',' << (miss ? 1 : 0) << '\n';
        }
    }
    if (!out) throw DataError("short write to " + path);
}

void write_signals_bin(const SignalPanel& sp, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out.write(kSignalMagic, sizeof kSignalMagic);
    put_u32(out, static_cast<uint32_t>(sp.cal.n_days()));
    put_u32(out, static_cast<uint32_t>(sp.N()));
    put_u32(out, static_cast<uint32_t>(sp.D()));
    for (Date d : sp.cal.days) put_u32(out, static_cast<uint32_t>(d));
    for (const auto& t : sp.tickers) {
        put_u32(out, static_cast<uint32_t>(t.size()));
        out.write(t.data(), static_cast<std::streamsize>(t.size()));
    }
    for (int w : sp.windows) put_u32(out, static_cast<uint32_t>(w));
    out.write(reinterpret_cast<const char*>(sp.z.data()),
              static_cast<std::streamsize>(sp.z.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(sp.missing.data()),
              static_cast<std::streamsize>(sp.missing.size()));
    if (!out) throw DataError("short write to " + path);
}

SignalPanel read_signals_bin(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open signal file: " + path);
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kSignalMagic, sizeof magic) != 0) {
        throw DataError("bad signal cache magic in " + path);
    }
    SignalPanel sp;
    const uint32_t n_days = get_u32(in);
    const uint32_t n = get_u32(in);
    const uint32_t d = get_u32(in);
    sp.cal.days.resize(n_days);
    for (uint32_t k = 0; k < n_days; ++k) sp.cal.days[k] = static_cast<Date>(get_u32(in));
    sp.tickers.resize(n);
    for (uint32_t k = 0; k < n; ++k) {
        const uint32_t len = get_u32(in);
        std::string s(len, '\0');
        in.read(s.data(), len);
        sp.tickers[k] = std::move(s);
    }
    sp.windows.resize(d);
    for (uint32_t k = 0; k < d; ++k) sp.windows[k] = static_cast<int>(get_u32(in));
    sp.z.resize(static_cast<size_t>(sp.n_slots()) * n * d);
    sp.missing.resize(static_cast<size_t>(sp.n_slots()) * n);
    in.read(reinterpret_cast<char*>(sp.z.data()),
            static_cast<std::streamsize>(sp.z.size() * sizeof(double)));
    in.read(reinterpret_cast<char*>(sp.missing.data()),
            static_cast<std::streamsize>(sp.missing.size()));
    if (!in) throw DataError("truncated signal cache: " + path);
    return sp;
}

}  // namespace esncast
