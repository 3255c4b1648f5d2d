#include "esncast/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "esncast/rng.hpp"
#include "esncast/stats.hpp"

namespace esncast {

namespace {

// Matched (prediction, realized) pairs grouped by slot, slots ascending.
struct MatchedEvents {
    std::vector<int> slots;
    std::vector<std::vector<std::pair<double, double>>> pairs;  // (pred, realized)
};

MatchedEvents match_events(const ForecastSet& fs, Horizon h, const TargetProvider& targets) {
    MatchedEvents ev;
    for (const auto& rec : fs.recs) {
        if (rec.h != h) continue;
        const auto r = targets.target(rec.slot, rec.stock, h);
        if (!r) continue;
        if (ev.slots.empty() || ev.slots.back() != rec.slot) {
            ev.slots.push_back(rec.slot);
            ev.pairs.emplace_back();
        }
        ev.pairs.back().emplace_back(rec.prediction, *r);
    }
    return ev;
}

}  // namespace

MsfeResult msfe_series(const ForecastSet& fs, Horizon h, const TargetProvider& targets) {
    const MatchedEvents ev = match_events(fs, h, targets);
    if (ev.slots.empty()) {
        throw DataError("msfe_series: no overlap between forecasts and realizations for " +
                        std::string(horizon_name(h)));
    }
    MsfeResult out;
    out.slots = ev.slots;
    out.msfe.reserve(ev.slots.size());
    out.cumsfe.reserve(ev.slots.size());
    double running = 0.0;
    for (size_t k = 0; k < ev.slots.size(); ++k) {
        double se = 0.0;
        for (const auto& [pred, real] : ev.pairs[k]) {
            const double d = real - pred;
            se += d * d;
        }
        const double m = se / static_cast<double>(ev.pairs[k].size());
        out.msfe.push_back(m);
        running += m;
        out.cumsfe.push_back(running / static_cast<double>(k + 1));
    }
    out.total = out.cumsfe.back();
    return out;
}

std::optional<double> pooled_r2(const ForecastSet& fs, Horizon h, const TargetProvider& targets,
                                bool zero_benchmark) {
    const MatchedEvents ev = match_events(fs, h, targets);
    double sse = 0.0;
    double sum_r = 0.0;
    long n = 0;
    for (const auto& bucket : ev.pairs) {
        for (const auto& [pred, real] : bucket) {
            const double d = real - pred;
            sse += d * d;
            sum_r += real;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    const double bench = zero_benchmark ? 0.0 : sum_r / static_cast<double>(n);
    double ss_bench = 0.0;
    for (const auto& bucket : ev.pairs) {
        for (const auto& [pred, real] : bucket) {
            (void)pred;
            const double d = real - bench;
            ss_bench += d * d;
        }
    }
    if (!(ss_bench > 0.0)) return std::nullopt;
    return 1.0 - sse / ss_bench;
}

DmResult diebold_mariano(std::span<const double> loss_a, std::span<const double> loss_b,
                         int h_overlap) {
    if (loss_a.size() != loss_b.size() || loss_a.empty()) {
        throw DataError("diebold_mariano: loss series must be nonempty and equal length");
    }
    if (h_overlap < 1) throw ConfigError("diebold_mariano: h_overlap must be >= 1");
    const long T = static_cast<long>(loss_a.size());

    std::vector<double> d(static_cast<size_t>(T));
    bool all_zero = true;
    for (long t = 0; t < T; ++t) {
        d[static_cast<size_t>(t)] = loss_a[static_cast<size_t>(t)] - loss_b[static_cast<size_t>(t)];
        if (d[static_cast<size_t>(t)] != 0.0) all_zero = false;
    }
    DmResult res;
    if (all_zero) {
        res.note = DmResult::Note::EqualByConstruction;
        res.statistic = std::numeric_limits<double>::quiet_NaN();
        res.p_value = std::numeric_limits<double>::quiet_NaN();
        return res;
    }

    const double dbar = stats::mean(d.data(), d.size());
    const int lags = std::min<long>(h_overlap - 1, T - 1);
    double lrv = 0.0;
    {
        // gamma_0 + 2 sum Bartlett-weighted autocovariances.
        double g0 = 0.0;
        for (long t = 0; t < T; ++t) {
            const double e = d[static_cast<size_t>(t)] - dbar;
            g0 += e * e;
        }
        g0 /= static_cast<double>(T);
        lrv = g0;
        for (int k = 1; k <= lags; ++k) {
            double gk = 0.0;
            for (long t = k; t < T; ++t) {
                gk += (d[static_cast<size_t>(t)] - dbar) * (d[static_cast<size_t>(t - k)] - dbar);
            }
            gk /= static_cast<double>(T);
            lrv += 2.0 * (1.0 - static_cast<double>(k) / (lags + 1)) * gk;
        }
    }

    if (!(lrv > 0.0)) {
        // Constant nonzero differentials: direction is certain, scale is not.
        res.note = DmResult::Note::SignOnlyDominance;
        res.statistic = dbar > 0 ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
        res.p_value = 0.0;
        return res;
    }

    double dm = dbar / std::sqrt(lrv / static_cast<double>(T));
    const double h = static_cast<double>(h_overlap);
    const double tt = static_cast<double>(T);
    const double hln = std::sqrt((tt + 1.0 - 2.0 * h + h * (h - 1.0) / tt) / tt);
    dm *= hln;
    res.statistic = dm;
    res.p_value = stats::student_t_two_sided_p(dm, tt - 1.0);
    return res;
}

namespace {

struct PairStat {
    int i, j;
    double dbar;
    double se;
};

}  // namespace

McsResult model_confidence_set(const std::vector<std::vector<double>>& losses, double alpha,
                               int bootstrap, uint64_t seed, int jobs) {
    const int n_models = static_cast<int>(losses.size());
    if (n_models < 2) throw ConfigError("model_confidence_set: need at least 2 models");
    const long T = static_cast<long>(losses[0].size());
    for (const auto& l : losses) {
        if (static_cast<long>(l.size()) != T) {
            throw DataError("model_confidence_set: loss series length mismatch");
        }
    }
    if (T < 2) throw DataError("model_confidence_set: loss series too short");
    if (bootstrap < 1) throw ConfigError("model_confidence_set: bootstrap draws must be >= 1");

    McsResult out;
    out.alpha = alpha;
    out.bootstrap = bootstrap;
    out.block_length = static_cast<int>(std::ceil(std::cbrt(static_cast<double>(T))));
    out.p_values.assign(static_cast<size_t>(n_models), 1.0);
    out.included.assign(static_cast<size_t>(n_models), 1);

    // One set of stationary-block index resamples shared by every pair and
    // every elimination round. Per-draw derived seeds keep the result
    // independent of the parallelism degree.
    std::vector<std::vector<int32_t>> draws(static_cast<size_t>(bootstrap));
    const double p_new_block = 1.0 / static_cast<double>(out.block_length);
    parallel_for(bootstrap, jobs, [&](int b) {
        Rng rng = Rng(seed).derive(static_cast<uint64_t>(b) + 1);
        auto& idx = draws[static_cast<size_t>(b)];
        idx.resize(static_cast<size_t>(T));
        int32_t cur = static_cast<int32_t>(rng.uniform_index(static_cast<uint64_t>(T)));
        idx[0] = cur;
        for (long t = 1; t < T; ++t) {
            if (rng.uniform() < p_new_block) {
                cur = static_cast<int32_t>(rng.uniform_index(static_cast<uint64_t>(T)));
            } else {
                cur = static_cast<int32_t>((cur + 1) % T);
            }
            idx[static_cast<size_t>(t)] = cur;
        }
    });

    std::vector<int> alive(static_cast<size_t>(n_models));
    for (int i = 0; i < n_models; ++i) alive[static_cast<size_t>(i)] = i;
    double p_running = 0.0;

    while (alive.size() >= 2) {
        const int na = static_cast<int>(alive.size());
        std::vector<PairStat> pairs;
        pairs.reserve(static_cast<size_t>(na) * (na - 1) / 2);
        for (int a = 0; a < na; ++a) {
            for (int b = a + 1; b < na; ++b) {
                const int i = alive[static_cast<size_t>(a)];
                const int j = alive[static_cast<size_t>(b)];
                double dbar = 0.0;
                for (long t = 0; t < T; ++t) {
                    dbar += losses[static_cast<size_t>(i)][static_cast<size_t>(t)] -
                            losses[static_cast<size_t>(j)][static_cast<size_t>(t)];
                }
                dbar /= static_cast<double>(T);
                pairs.push_back({i, j, dbar, 0.0});
            }
        }

        // Bootstrap means per pair; se from their dispersion around dbar.
        const int np = static_cast<int>(pairs.size());
        Matrix boot_means(bootstrap, np);
        parallel_for(bootstrap, jobs, [&](int b) {
            const auto& idx = draws[static_cast<size_t>(b)];
            for (int p = 0; p < np; ++p) {
                const auto& li = losses[static_cast<size_t>(pairs[static_cast<size_t>(p)].i)];
                const auto& lj = losses[static_cast<size_t>(pairs[static_cast<size_t>(p)].j)];
                double s = 0.0;
                for (long t = 0; t < T; ++t) {
                    const int32_t u = idx[static_cast<size_t>(t)];
                    s += li[static_cast<size_t>(u)] - lj[static_cast<size_t>(u)];
                }
                boot_means.at(b, p) = s / static_cast<double>(T);
            }
        });
        for (int p = 0; p < np; ++p) {
            double ss = 0.0;
            for (int b = 0; b < bootstrap; ++b) {
                const double e = boot_means.at(b, p) - pairs[static_cast<size_t>(p)].dbar;
                ss += e * e;
            }
            pairs[static_cast<size_t>(p)].se = std::sqrt(ss / static_cast<double>(bootstrap));
        }

        auto tstat = [](double num, double se) {
            if (se > 0.0) return num / se;
            if (num == 0.0) return 0.0;
            return num > 0 ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity();
        };

        double t_obs = 0.0;
        for (const auto& pr : pairs) t_obs = std::max(t_obs, std::abs(tstat(pr.dbar, pr.se)));

        double p_value;
        if (std::isinf(t_obs)) {
            p_value = 0.0;
        } else {
            int count = 0;
            for (int b = 0; b < bootstrap; ++b) {
                double t_star = 0.0;
                for (int p = 0; p < np; ++p) {
                    const auto& pr = pairs[static_cast<size_t>(p)];
                    if (pr.se > 0.0) {
                        t_star = std::max(t_star, std::abs(boot_means.at(b, p) - pr.dbar) / pr.se);
                    }
                }
                if (t_star >= t_obs) ++count;
            }
            p_value = static_cast<double>(count) / static_cast<double>(bootstrap);
        }
        p_running = std::max(p_running, p_value);

        // Worst model: largest t against any rival.
        int worst = alive[0];
        double worst_t = -std::numeric_limits<double>::infinity();
        for (const auto& pr : pairs) {
            const double tij = tstat(pr.dbar, pr.se);
            if (tij > worst_t) {
                worst_t = tij;
                worst = pr.i;
            }
            if (-tij > worst_t) {
                worst_t = -tij;
                worst = pr.j;
            }
        }
        out.p_values[static_cast<size_t>(worst)] = p_running;
        out.elimination_order.push_back(worst);
        alive.erase(std::find(alive.begin(), alive.end(), worst));
    }
    out.p_values[static_cast<size_t>(alive[0])] = 1.0;
    out.elimination_order.push_back(alive[0]);

    for (int i = 0; i < n_models; ++i) {
        out.included[static_cast<size_t>(i)] = out.p_values[static_cast<size_t>(i)] >= alpha ? 1 : 0;
    }
    return out;
}

RobustnessBands robustness_study(const ReservoirSpec& base_spec, int n_models,
                                 const SignalPanel& signals, const TargetProvider& targets,
                                 const TradingCalendar& cal, const HorizonConfig& hcfg,
                                 const MsfeResult& reference, int jobs) {
    if (n_models < 1) throw ConfigError("robustness_study: n_models must be >= 1");

    std::vector<MsfeResult> runs(static_cast<size_t>(n_models));
    parallel_for(n_models, jobs, [&](int k) {
        ReservoirSpec spec = base_spec;
        spec.seed = base_spec.seed + static_cast<uint64_t>(k) + 1;
        const ForecastSet fs = run_esn(signals, targets, cal, hcfg, spec);
        runs[static_cast<size_t>(k)] = msfe_series(fs, hcfg.horizon, targets);
    });

    // Common event grid across the reference and every redraw.
    std::vector<int> common = reference.slots;
    for (const auto& r : runs) {
        std::vector<int> merged;
        std::set_intersection(common.begin(), common.end(), r.slots.begin(), r.slots.end(),
                              std::back_inserter(merged));
        common.swap(merged);
    }
    if (common.empty()) throw DataError("robustness_study: no common prediction events");

    auto restrict_cum = [&common](const MsfeResult& r) {
        std::vector<double> cum;
        cum.reserve(common.size());
        double running = 0.0;
        size_t pos = 0;
        long n = 0;
        for (int slot : common) {
            while (r.slots[pos] != slot) ++pos;
            running += r.msfe[pos];
            ++n;
            cum.push_back(running / static_cast<double>(n));
        }
        return cum;
    };

    const std::vector<double> ref_cum = restrict_cum(reference);
    RobustnessBands bands;
    bands.slots = common;
    bands.curves = Matrix(n_models, static_cast<int>(common.size()));
    for (int k = 0; k < n_models; ++k) {
        const std::vector<double> cum = restrict_cum(runs[static_cast<size_t>(k)]);
        for (size_t e = 0; e < common.size(); ++e) {
            bands.curves.at(k, static_cast<int>(e)) = cum[e] / ref_cum[e];
        }
    }

    const size_t ne = common.size();
    bands.p5.resize(ne);
    bands.p25.resize(ne);
    bands.median.resize(ne);
    bands.p75.resize(ne);
    bands.p95.resize(ne);
    std::vector<double> col(static_cast<size_t>(n_models));
    for (size_t e = 0; e < ne; ++e) {
        for (int k = 0; k < n_models; ++k) col[static_cast<size_t>(k)] = bands.curves.at(k, static_cast<int>(e));
        std::sort(col.begin(), col.end());
        bands.p5[e] = stats::quantile_sorted(col, 0.05);
        bands.p25[e] = stats::quantile_sorted(col, 0.25);
        bands.median[e] = stats::quantile_sorted(col, 0.50);
        bands.p75[e] = stats::quantile_sorted(col, 0.75);
        bands.p95[e] = stats::quantile_sorted(col, 0.95);
    }
    return bands;
}

}  // namespace esncast
