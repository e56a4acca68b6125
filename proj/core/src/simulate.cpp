#include "stopt/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "stopt/rng.hpp"

namespace stopt {

const char* to_string(Stage s) {
    switch (s) {
        case Stage::post_competition: return "post_competition";
        case Stage::post_entry: return "post_entry";
        case Stage::pre_entry: return "pre_entry";
    }
    return "?";
}

const char* to_string(ThresholdField f) {
    switch (f) {
        case ThresholdField::cancel_at: return "cancel_at";
        case ThresholdField::enter_at: return "enter_at";
        case ThresholdField::abandon_pre_at: return "abandon_pre_at";
        case ThresholdField::abandon_post_at: return "abandon_post_at";
    }
    return "?";
}

double default_horizon(const MarketParams& market) {
    const double t = std::log(1e4) / (market.rho - market.mu);
    return std::min(t, 500.0);
}

namespace {

constexpr int kBlock = 8192;
constexpr int kChunk = 32;  // scan-skip granularity; must divide kBlock
constexpr std::size_t kMaxVariants = 32;

// Counter layout of a path's stream: counters 0 and 1 hold the two clock
// draws, normals start at 2. The layout is fixed across stages and
// strategies, so one (seed, path) pair always produces the same trajectory:
// comparisons between strategies or start prices on the same seed are exact
// common-random-number comparisons, and several variants can be priced on a
// single shared walk with results bit-identical to separate runs.
constexpr std::uint64_t kCtrClock1 = 0;
constexpr std::uint64_t kCtrClock2 = 1;
constexpr std::uint64_t kCtrNormals = 2;

double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 64) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

struct MeanSe {
    double mean, se;
};

MeanSe mean_and_se(std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n == 0) return {0.0, 0.0};
    const double mean = pairwise_sum(v.data(), n) / static_cast<double>(n);
    if (n == 1) return {mean, 0.0};
    for (auto& x : v) {
        const double d = x - mean;
        x = d * d;
    }
    const double ss = pairwise_sum(v.data(), n);
    return {mean, std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n))};
}

// Antithetic siblings are dependent; the i.i.d. sample is the pair averages.
MeanSe sample_stats(std::vector<double>& v, bool antithetic) {
    if (!antithetic) return mean_and_se(v);
    std::vector<double> pair_means(v.size() / 2);
    for (std::size_t i = 0; i < pair_means.size(); ++i)
        pair_means[i] = 0.5 * (v[2 * i] + v[2 * i + 1]);
    return mean_and_se(pair_means);
}

struct Variant {
    double x0;
    ThresholdStrategy strat;
    Stage stage;
    ProfitParams profit;
    CostParams cost;
};

enum class Phase { incubation, pre_comp, post_comp, done };

struct VariantState {
    Phase phase = Phase::done;
    long pos = 1;        // next global grid index to process (point 0 is the start)
    double value = 0.0;
    double tail = 0.0;
    double sx = 0.0;     // running sum of w_j exp(cum_j - rho dt j) over the segment
    long seg_i0 = 0;     // global index of the segment's first point
    double seg_wx = 1.0; // discounted relative price at the segment's first point
    double flow_s = 0.0, flow_q = 0.0;  // segment flow = flow_s*x + flow_q
    double log_cancel = 0.0, log_enter = 0.0, log_pre = 0.0, log_post = 0.0;
    long m1 = 0, m2 = 0;  // global clock indices; n_steps+1 means "never"
};

class BatchKernel {
  public:
    BatchKernel(const ModelParams& params, std::vector<Variant> variants, const McConfig& cfg)
        : params_(params), variants_(std::move(variants)), cfg_(cfg) {
        if (variants_.empty() || variants_.size() > kMaxVariants)
            throw std::invalid_argument("simulate: 1 to 32 variants per batch");
        for (const auto& v : variants_) {
            if (!(v.x0 > 0.0)) throw std::invalid_argument("simulate: x0 must be positive");
            if (!(v.strat.cancel_at > 0.0) || !(v.strat.enter_at > 0.0) ||
                !(v.strat.abandon_pre_at > 0.0) || !(v.strat.abandon_post_at > 0.0))
                throw std::invalid_argument("simulate: thresholds must be positive");
        }
        if (!(cfg_.dt > 0.0)) throw std::invalid_argument("simulate: dt must be positive");
        if (cfg_.n_paths < 1) throw std::invalid_argument("simulate: n_paths must be >= 1");
        const double horizon =
            cfg_.horizon > 0.0 ? cfg_.horizon : default_horizon(params_.market);
        n_steps_ = std::max<long>(1, static_cast<long>(std::llround(horizon / cfg_.dt)));
        const auto& m = params_.market;
        cd_ = (m.mu - 0.5 * m.sigma * m.sigma) * cfg_.dt;
        cv_ = m.sigma * std::sqrt(cfg_.dt);
        rho_dt_ = m.rho * cfg_.dt;
        qd_ = std::exp(-rho_dt_);
        inv_1mq_ = 1.0 / (1.0 - qd_);
    }

    const std::vector<Variant>& variants() const { return variants_; }
    const McConfig& config() const { return cfg_; }

    struct Scratch {
        std::vector<double> u, z, cum, wx;
        std::vector<double> cmin, cmax, csum;
        Scratch()
            : u(kBlock), z(kBlock), cum(kBlock), wx(kBlock), cmin(kBlock / kChunk),
              cmax(kBlock / kChunk), csum(kBlock / kChunk) {}
    };

    struct PathValues {
        double value[kMaxVariants];
        double tail[kMaxVariants];
    };

    PathValues simulate_path(long path_index, Scratch& s) const {
        std::uint64_t key;
        double sign;
        if (cfg_.antithetic) {
            key = rng::path_key(cfg_.seed, static_cast<std::uint64_t>(path_index / 2));
            sign = (path_index % 2 == 0) ? 1.0 : -1.0;
        } else {
            key = rng::path_key(cfg_.seed, static_cast<std::uint64_t>(path_index));
            sign = 1.0;
        }
        const long dur1 = clock_steps(key, kCtrClock1, params_.hazards.lambda1, sign);
        const long dur2 = clock_steps(key, kCtrClock2, params_.hazards.lambda2, sign);

        const std::size_t nv = variants_.size();
        VariantState st[kMaxVariants];
        std::size_t active = 0;
        for (std::size_t v = 0; v < nv; ++v) {
            init_variant(st[v], variants_[v], dur1, dur2);
            if (st[v].phase != Phase::done) ++active;
        }

        std::uint64_t ctr = kCtrNormals;
        double cum0 = 0.0;
        long base = 0;  // global index of the last point of the previous block
        while (active > 0 && base < n_steps_) {
            const int m = static_cast<int>(std::min<long>(kBlock, n_steps_ - base));
            // shared trajectory block: uniforms, normals, log path,
            // discounted price, chunk aggregates
            for (int j = 0; j < m; ++j)
                s.u[j] = rng::to_u01(rng::counter_u64(key, ctr + static_cast<std::uint64_t>(j)));
            ctr += static_cast<std::uint64_t>(m);
            for (int j = 0; j < m; ++j) s.z[j] = sign * inv_normal_cdf_central(s.u[j]);
            for (int j = 0; j < m; ++j)
                if (s.u[j] < 0.02425 || s.u[j] > 0.97575) s.z[j] = sign * inv_normal_cdf(s.u[j]);
            double c = cum0;
            for (int j = 0; j < m; ++j) {
                c += cd_ + cv_ * s.z[j];
                s.cum[j] = c;
            }
            // wx_j = exp(cum_j - rho dt j), the discounted price relative to x0
            const double dshift = -rho_dt_ * static_cast<double>(base + 1);
            for (int j = 0; j < m; ++j)
                s.wx[j] = fast_exp(s.cum[j] + dshift - rho_dt_ * static_cast<double>(j));
            const int chunks = (m + kChunk - 1) / kChunk;
            for (int k = 0; k < chunks; ++k) {
                const int lo = k * kChunk, hi = std::min(m, lo + kChunk);
                double mn = s.cum[lo], mx = s.cum[lo], sum = s.wx[lo];
                for (int j = lo + 1; j < hi; ++j) {
                    mn = std::min(mn, s.cum[j]);
                    mx = std::max(mx, s.cum[j]);
                    sum += s.wx[j];
                }
                s.cmin[k] = mn;
                s.cmax[k] = mx;
                s.csum[k] = sum;
            }

            for (std::size_t v = 0; v < nv; ++v) {
                if (st[v].phase == Phase::done) continue;
                advance_variant(st[v], variants_[v], s, base, m);
                if (st[v].phase == Phase::done) --active;
            }
            cum0 = s.cum[m - 1];
            base += m;
        }

        PathValues out{};
        for (std::size_t v = 0; v < nv; ++v) {
            if (st[v].phase != Phase::done) {
                // a segment opened exactly at the horizon point: zero accrued
                // time, close there and record the truncation bound
                const double x = variants_[v].x0 * st[v].seg_wx *
                                 fast_exp(rho_dt_ * static_cast<double>(st[v].seg_i0));
                st[v].tail = tail_bound(variants_[v], discount_at(st[v].seg_i0), x, st[v].phase);
                flush_segment(st[v], variants_[v].x0, st[v].seg_wx, st[v].seg_i0);
                st[v].phase = Phase::done;
            }
            out.value[v] = st[v].value;
            out.tail[v] = st[v].tail;
        }
        return out;
    }

  private:
    double discount_at(long i) const { return fast_exp(-rho_dt_ * static_cast<double>(i)); }

    long clock_steps(std::uint64_t key, std::uint64_t ctr, double lambda, double sign) const {
        if (lambda <= 0.0) return n_steps_ + 1;
        double u = rng::to_u01(rng::counter_u64(key, ctr));
        if (sign < 0.0) u = 1.0 - u;
        const double zeta = -std::log(u) / lambda;
        if (!(zeta < static_cast<double>(n_steps_ + 1) * cfg_.dt)) return n_steps_ + 1;
        return std::max<long>(1, static_cast<long>(std::ceil(zeta / cfg_.dt)));
    }

    void begin_segment(VariantState& st, double flow_s, double flow_q, double wx_here,
                       long i_here) const {
        st.flow_s = flow_s;
        st.flow_q = flow_q;
        st.seg_i0 = i_here;
        st.seg_wx = wx_here;
        st.sx = 0.5 * wx_here;
    }

    // Close the segment at a point already accumulated with full weight. The
    // constant part of the affine flow integrates in closed form.
    void flush_segment(VariantState& st, double x0, double wx_last, long i_last) const {
        st.sx -= 0.5 * wx_last;
        const double d0 = discount_at(st.seg_i0);
        const double d1 = discount_at(i_last);
        const double s1 = (d0 - d1 * qd_) * inv_1mq_ - 0.5 * (d0 + d1);
        st.value += cfg_.dt * (st.flow_s * x0 * st.sx + st.flow_q * s1);
    }

    void enter_pre_comp(VariantState& st, const Variant& v, long i, double log_x, double wx,
                        long dur2) const {
        if (log_x <= st.log_pre) {
            st.phase = Phase::done;
            return;
        }
        st.phase = Phase::pre_comp;
        st.pos = i + 1;
        st.m2 = dur2 > n_steps_ ? n_steps_ + 1 : i + dur2;
        begin_segment(st, 1.0, -v.profit.cap_k, wx, i);
    }

    void enter_post_comp(VariantState& st, const Variant& v, long i, double log_x,
                         double wx) const {
        if (log_x <= st.log_post) {
            st.phase = Phase::done;
            return;
        }
        st.phase = Phase::post_comp;
        st.pos = i + 1;
        begin_segment(st, v.profit.alpha, -v.profit.beta, wx, i);
    }

    void init_variant(VariantState& st, const Variant& v, long dur1, long dur2) const {
        st = VariantState{};
        st.log_cancel = std::log(v.strat.cancel_at / v.x0);
        st.log_enter = std::log(v.strat.enter_at / v.x0);
        st.log_pre = std::log(v.strat.abandon_pre_at / v.x0);
        st.log_post = std::log(v.strat.abandon_post_at / v.x0);
        switch (v.stage) {
            case Stage::pre_entry:
                if (0.0 <= st.log_cancel) { st.phase = Phase::done; return; }
                if (0.0 >= st.log_enter) {
                    enter_pre_comp(st, v, 0, 0.0, 1.0, dur2);
                    return;
                }
                st.phase = Phase::incubation;
                st.pos = 1;
                st.m1 = dur1;
                st.m2 = dur2;  // delay; anchored at the entry index later
                begin_segment(st, -v.cost.cost_slope, -v.cost.cost_intercept, 1.0, 0);
                return;
            case Stage::post_entry:
                enter_pre_comp(st, v, 0, 0.0, 1.0, dur2);
                return;
            case Stage::post_competition:
                enter_post_comp(st, v, 0, 0.0, 1.0);
                return;
        }
    }

    double tail_bound(const Variant& v, double dabs, double x, Phase phase) const {
        const auto& pr = v.profit;
        double smax, qmax;
        switch (phase) {
            case Phase::post_comp:
                smax = pr.alpha;
                qmax = pr.beta;
                break;
            case Phase::pre_comp:
                smax = std::max(1.0, pr.alpha);
                qmax = std::max(pr.cap_k, pr.beta);
                break;
            default:
                smax = std::max({v.cost.cost_slope, 1.0, pr.alpha});
                qmax = std::max({v.cost.cost_intercept, pr.cap_k, pr.beta});
        }
        const auto& m = params_.market;
        return dabs * (smax * x / (m.rho - m.mu) + qmax / m.rho);
    }

    // Walks the variant's state machine over this block's shared points.
    // Point p (global) lives at local j = p - base - 1 for j in [0, m).
    // Chunks whose price range stays strictly inside the active band are
    // consumed via the precomputed sums without touching individual points.
    void advance_variant(VariantState& st, const Variant& v, const Scratch& s, long base,
                         int m) const {
        const long block_last = base + m;
        while (st.phase != Phase::done && st.pos <= block_last) {
            double lo, up;
            long seg_stop;
            switch (st.phase) {
                case Phase::incubation:
                    lo = st.log_cancel;
                    up = st.log_enter;
                    seg_stop = std::min(st.m1, n_steps_);
                    break;
                case Phase::pre_comp:
                    lo = st.log_pre;
                    up = std::numeric_limits<double>::infinity();
                    seg_stop = std::min(st.m2, n_steps_);
                    break;
                default:
                    lo = st.log_post;
                    up = std::numeric_limits<double>::infinity();
                    seg_stop = n_steps_;
                    break;
            }

            int j = static_cast<int>(st.pos - base - 1);
            int event = 0;  // 1 below, 2 above, 3 segment close
            for (;;) {
                if ((j & (kChunk - 1)) == 0 && j + kChunk <= m &&
                    base + j + kChunk < seg_stop) {
                    const int k = j / kChunk;
                    if (s.cmin[k] > lo && s.cmax[k] < up) {
                        st.sx += s.csum[k];
                        j += kChunk;
                        if (j >= m) {
                            st.pos = base + 1 + j;
                            return;
                        }
                        continue;
                    }
                }
                if (j >= m) {
                    st.pos = base + 1 + j;
                    return;
                }
                st.sx += s.wx[j];
                const double c = s.cum[j];
                if (c <= lo) { event = 1; break; }
                if (c >= up) { event = 2; break; }
                if (base + 1 + j == seg_stop) { event = 3; break; }
                ++j;
            }

            const long p = base + 1 + j;
            const double wx_here = s.wx[j];
            const double cum_here = s.cum[j];
            st.pos = p + 1;
            flush_segment(st, v.x0, wx_here, p);

            switch (st.phase) {
                case Phase::incubation:
                    if (event == 1) {
                        st.phase = Phase::done;  // cancelled
                    } else if (event == 2) {
                        enter_pre_comp(st, v, p, cum_here, wx_here, st.m2);
                    } else if (st.m1 <= n_steps_ && seg_stop == st.m1) {
                        st.phase = Phase::done;  // terminated, no further flow
                    } else {
                        st.tail = tail_bound(v, discount_at(p), v.x0 * fast_exp(cum_here),
                                             Phase::incubation);
                        st.phase = Phase::done;  // horizon truncation
                    }
                    break;
                case Phase::pre_comp:
                    if (event == 1) {
                        st.phase = Phase::done;  // abandoned before competition
                    } else if (st.m2 <= n_steps_ && seg_stop == st.m2) {
                        // competitor arrived: the abandonment level switches now
                        enter_post_comp(st, v, p, cum_here, wx_here);
                    } else {
                        st.tail = tail_bound(v, discount_at(p), v.x0 * fast_exp(cum_here),
                                             Phase::pre_comp);
                        st.phase = Phase::done;
                    }
                    break;
                case Phase::post_comp:
                    if (event == 3)
                        st.tail = tail_bound(v, discount_at(p), v.x0 * fast_exp(cum_here),
                                             Phase::post_comp);
                    st.phase = Phase::done;
                    break;
                case Phase::done:
                    break;
            }
        }
    }

    ModelParams params_;
    std::vector<Variant> variants_;
    McConfig cfg_;
    long n_steps_;
    double cd_, cv_;
    double rho_dt_, qd_, inv_1mq_;
};

void run_batch(const BatchKernel& kernel, std::vector<std::vector<double>>& values,
               std::vector<std::vector<double>>& tails) {
    const McConfig& cfg = kernel.config();
    long n = cfg.n_paths;
    if (cfg.antithetic && n % 2 != 0) ++n;  // antithetic pairs must be complete
    const std::size_t nv = kernel.variants().size();
    values.assign(nv, std::vector<double>(static_cast<std::size_t>(n)));
    tails.assign(nv, std::vector<double>(static_cast<std::size_t>(n)));

    unsigned tc = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                  : std::max(1u, std::thread::hardware_concurrency());
    tc = std::min<unsigned>(tc, static_cast<unsigned>(n));

    auto worker = [&](long lo, long hi) {
        BatchKernel::Scratch scratch;
        for (long i = lo; i < hi; ++i) {
            const BatchKernel::PathValues out = kernel.simulate_path(i, scratch);
            for (std::size_t v = 0; v < nv; ++v) {
                values[v][static_cast<std::size_t>(i)] = out.value[v];
                tails[v][static_cast<std::size_t>(i)] = out.tail[v];
            }
        }
    };
    if (tc <= 1) {
        worker(0, n);
    } else {
        std::vector<std::thread> threads;
        const long chunk = (n + tc - 1) / tc;
        for (unsigned t = 0; t < tc; ++t) {
            const long lo = t * chunk, hi = std::min<long>(n, lo + chunk);
            if (lo >= hi) break;
            threads.emplace_back(worker, lo, hi);
        }
        for (auto& th : threads) th.join();
    }
}

McEstimate finalize(std::vector<double>& values, std::vector<double>& tails, bool antithetic) {
    McEstimate est;
    est.n_paths = static_cast<long>(values.size());
    est.truncation_bound =
        pairwise_sum(tails.data(), tails.size()) / static_cast<double>(tails.size());
    const MeanSe ms = sample_stats(values, antithetic);
    est.mean = ms.mean;
    est.std_err = ms.se;
    return est;
}

std::vector<McEstimate> simulate_variants(const ModelParams& params,
                                          const std::vector<Variant>& variants,
                                          const McConfig& cfg) {
    BatchKernel kernel(params, variants, cfg);
    std::vector<std::vector<double>> values, tails;
    run_batch(kernel, values, tails);
    std::vector<McEstimate> out;
    out.reserve(variants.size());
    for (std::size_t v = 0; v < variants.size(); ++v)
        out.push_back(finalize(values[v], tails[v], cfg.antithetic));
    return out;
}

}  // namespace

McEstimate simulate_npv(const ModelParams& params, const ThresholdStrategy& strategy, Stage stage,
                        double x0, const McConfig& cfg) {
    return simulate_variants(params, {Variant{x0, strategy, stage, params.profit, params.cost}},
                             cfg)
        .front();
}

std::vector<McEstimate> simulate_npv_many(const ModelParams& params,
                                          const ThresholdStrategy& strategy, Stage stage,
                                          std::span<const double> x0s, const McConfig& cfg) {
    std::vector<Variant> variants;
    variants.reserve(x0s.size());
    for (const double x0 : x0s)
        variants.push_back(Variant{x0, strategy, stage, params.profit, params.cost});
    return simulate_variants(params, variants, cfg);
}

std::vector<McEstimate> simulate_npv_batch(const ModelParams& params,
                                           const ThresholdStrategy& strategy,
                                           std::span<const StagePrice> points,
                                           const McConfig& cfg) {
    std::vector<Variant> variants;
    variants.reserve(points.size());
    for (const auto& pt : points)
        variants.push_back(Variant{pt.x0, strategy, pt.stage, params.profit, params.cost});
    return simulate_variants(params, variants, cfg);
}

std::vector<McEstimate> simulate_npv_scenario_batch(const MarketParams& market,
                                                    const HazardRates& hazards,
                                                    std::span<const ScenarioPoint> points,
                                                    const McConfig& cfg) {
    ModelParams shell{market, points.empty() ? ProfitParams{} : points.front().profit,
                      points.empty() ? CostParams{} : points.front().cost, hazards};
    std::vector<Variant> variants;
    variants.reserve(points.size());
    for (const auto& pt : points)
        variants.push_back(Variant{pt.x0, pt.strategy, pt.stage, pt.profit, pt.cost});
    return simulate_variants(shell, variants, cfg);
}

// ---------------------------------------------------------------------------
// Killed-discount estimator of the pre-competition value: the competitor
// clock is integrated out, leaving discount rate rho + lambda2 and inflow
// f(x) + lambda2 * W(x), with W the closed-form value of abandoning the
// post-competition flow at strategy.abandon_post_at.
// ---------------------------------------------------------------------------

namespace {

McEstimate simulate_killed_v(const ModelParams& params, const ThresholdStrategy& strategy,
                             double x0, const McConfig& cfg) {
    if (!(x0 > 0.0)) throw std::invalid_argument("killed estimator: x0 must be positive");
    const auto& m = params.market;
    const auto& pr = params.profit;
    const double l2 = params.hazards.lambda2;
    const double rate = m.rho + l2;
    const double horizon = cfg.horizon > 0.0 ? cfg.horizon : default_horizon(m);
    const long n_steps = std::max<long>(1, static_cast<long>(std::llround(horizon / cfg.dt)));
    const double cd = (m.mu - 0.5 * m.sigma * m.sigma) * cfg.dt;
    const double cv = m.sigma * std::sqrt(cfg.dt);
    const double dstep = std::exp(-rate * cfg.dt);

    // W(x) = b_thr x^k1 + alpha x/(rho-mu) - beta/rho above the threshold,
    // pinned by value matching W(threshold) = 0.
    const double half_s2_minus_mu = 0.5 * m.sigma * m.sigma - m.mu;
    const double k1 = (half_s2_minus_mu -
                       std::sqrt(half_s2_minus_mu * half_s2_minus_mu +
                                 2.0 * m.sigma * m.sigma * m.rho)) /
                      (m.sigma * m.sigma);
    const double thr = strategy.abandon_post_at;
    const double perp_thr = pr.alpha * thr / (m.rho - m.mu) - pr.beta / m.rho;
    const double b_thr = -perp_thr / std::exp(k1 * std::log(thr));
    const double log_thr = std::log(thr);
    const double log_pre = std::log(strategy.abandon_pre_at);

    const double s_above = 1.0 + l2 * pr.alpha / (m.rho - m.mu);
    const double q_above = -pr.cap_k - l2 * pr.beta / m.rho;
    const double w_pow = l2 * b_thr;
    const double smax = s_above;
    const double qmax =
        pr.cap_k + l2 * (pr.beta / m.rho + std::fabs(b_thr) * std::exp(k1 * std::log(thr)));

    long n = cfg.n_paths;
    if (cfg.antithetic && n % 2 != 0) ++n;
    std::vector<double> values(static_cast<std::size_t>(n));
    std::vector<double> tails(static_cast<std::size_t>(n));

    auto flow = [&](double log_x) {
        const double x = fast_exp(log_x);
        if (log_x <= log_thr) return x - pr.cap_k;
        return s_above * x + q_above + w_pow * fast_exp(k1 * log_x);
    };

    auto worker = [&](long lo, long hi) {
        for (long p = lo; p < hi; ++p) {
            std::uint64_t key;
            double sign = 1.0;
            if (cfg.antithetic) {
                key = rng::path_key(cfg.seed, static_cast<std::uint64_t>(p / 2));
                sign = (p % 2 == 0) ? 1.0 : -1.0;
            } else {
                key = rng::path_key(cfg.seed, static_cast<std::uint64_t>(p));
            }
            double log_x = std::log(x0);
            double value = 0.0, tail = 0.0;
            if (log_x > log_pre) {
                double dfac = 1.0;
                double acc = 0.5 * flow(log_x);
                std::uint64_t ctr = kCtrNormals;
                long i = 0;
                bool stopped = false;
                while (i < n_steps) {
                    const double u = rng::uniform(key, ctr++);
                    log_x += cd + cv * sign * inv_normal_cdf(u);
                    dfac *= dstep;
                    ++i;
                    if (log_x <= log_pre) stopped = true;
                    const double fl = dfac * flow(log_x);
                    acc += (stopped || i == n_steps) ? 0.5 * fl : fl;
                    if (stopped) break;
                }
                value = cfg.dt * acc;
                if (!stopped) tail = dfac * (smax * fast_exp(log_x) / (rate - m.mu) + qmax / rate);
            }
            values[static_cast<std::size_t>(p)] = value;
            tails[static_cast<std::size_t>(p)] = tail;
        }
    };

    unsigned tc = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                  : std::max(1u, std::thread::hardware_concurrency());
    tc = std::min<unsigned>(tc, static_cast<unsigned>(n));
    if (tc <= 1) {
        worker(0, n);
    } else {
        std::vector<std::thread> threads;
        const long chunk = (n + tc - 1) / tc;
        for (unsigned t = 0; t < tc; ++t) {
            const long lo = t * chunk, hi = std::min<long>(n, lo + chunk);
            if (lo >= hi) break;
            threads.emplace_back(worker, lo, hi);
        }
        for (auto& th : threads) th.join();
    }
    return finalize(values, tails, cfg.antithetic);
}

}  // namespace

std::string KillingIdentityReport::summary() const {
    char buf[256];
    std::snprintf(buf, sizeof buf, "two-clock %.6g (se %.3g)  killed %.6g (se %.3g)  z=%.3f",
                  two_clock.mean, two_clock.std_err, killed.mean, killed.std_err, z);
    return buf;
}

KillingIdentityReport killing_identity_check(const ModelParams& params,
                                             const ThresholdStrategy& strategy, double x0,
                                             const McConfig& cfg) {
    KillingIdentityReport report;
    report.two_clock = simulate_npv(params, strategy, Stage::post_entry, x0, cfg);
    McConfig killed_cfg = cfg;
    killed_cfg.seed = rng::mix64(cfg.seed ^ 0x9e3779b97f4a7c15ULL);  // independent stream
    report.killed = simulate_killed_v(params, strategy, x0, killed_cfg);
    const double se = std::hypot(report.two_clock.std_err, report.killed.std_err);
    report.z = se > 0.0 ? (report.two_clock.mean - report.killed.mean) / se : 0.0;
    return report;
}

PerturbationReport perturbation_optimality(const ModelParams& params,
                                           const ThresholdStrategy& base, ThresholdField which,
                                           std::span<const double> deltas, double x0,
                                           const McConfig& cfg) {
    PerturbationReport report;
    report.which = which;
    switch (which) {
        case ThresholdField::abandon_post_at: report.stage = Stage::post_competition; break;
        case ThresholdField::abandon_pre_at: report.stage = Stage::post_entry; break;
        default: report.stage = Stage::pre_entry; break;
    }

    // one shared-trajectory batch: the base plus one variant per delta; the
    // per-path value differences then isolate the strategy change exactly
    std::vector<Variant> variants{Variant{x0, base, report.stage, params.profit, params.cost}};
    for (const double delta : deltas) {
        ThresholdStrategy pert = base;
        switch (which) {
            case ThresholdField::cancel_at: pert.cancel_at *= 1.0 + delta; break;
            case ThresholdField::enter_at: pert.enter_at *= 1.0 + delta; break;
            case ThresholdField::abandon_pre_at: pert.abandon_pre_at *= 1.0 + delta; break;
            case ThresholdField::abandon_post_at: pert.abandon_post_at *= 1.0 + delta; break;
        }
        variants.push_back(Variant{x0, pert, report.stage, params.profit, params.cost});
    }

    BatchKernel kernel(params, variants, cfg);
    std::vector<std::vector<double>> values, tails;
    run_batch(kernel, values, tails);

    const std::vector<double> base_values = values[0];
    report.base = finalize(values[0], tails[0], cfg.antithetic);

    for (std::size_t d = 0; d < deltas.size(); ++d) {
        PerturbationRow row;
        row.delta = deltas[d];
        const auto& pert = variants[d + 1].strat;
        switch (which) {
            case ThresholdField::cancel_at: row.threshold = pert.cancel_at; break;
            case ThresholdField::enter_at: row.threshold = pert.enter_at; break;
            case ThresholdField::abandon_pre_at: row.threshold = pert.abandon_pre_at; break;
            case ThresholdField::abandon_post_at: row.threshold = pert.abandon_post_at; break;
        }
        std::vector<double> diffs(values[d + 1].size());
        for (std::size_t i = 0; i < diffs.size(); ++i)
            diffs[i] = values[d + 1][i] - base_values[i];
        row.estimate = finalize(values[d + 1], tails[d + 1], cfg.antithetic);
        const MeanSe ms = sample_stats(diffs, cfg.antithetic);
        row.diff = ms.mean;
        row.diff_std_err = ms.se;
        // the horizon clips both strategies; a genuine improvement has to
        // clear the noise and the two truncation allowances
        const double allowance =
            report.base.truncation_bound + row.estimate.truncation_bound;
        row.improved = ms.se > 0.0 && ms.mean > 3.0 * ms.se + allowance;
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace stopt
