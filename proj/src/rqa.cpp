#include "ser/rqa.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ser/errors.hpp"
#include "ser/numerics.hpp"

namespace ser {

namespace {

void validate_config(const RqaConfig& cfg) {
    if (!(cfg.frame_len > cfg.hop && cfg.hop > 0.0))
        throw UserError("rqa: need frame_len > hop > 0");
    if (cfg.d_embed < 1) throw UserError("rqa: d_embed must be >= 1");
    if (cfg.l_min < 1 || cfg.v_min < 1) throw UserError("rqa: l_min/v_min must be >= 1");
    if (cfg.epsilon_rule != RqaConfig::EpsRule::fixed &&
        (cfg.epsilon_value <= 0.0 || cfg.epsilon_value >= 1.0))
        throw UserError("rqa: fraction/target rate must lie in (0, 1)");
}

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    if (v.empty()) return 0.0;
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

struct LineStats {
    std::map<int, long long> hist;  // run length -> count

    void add_run(int len) {
        if (len > 0) ++hist[len];
    }
    double sum_len(int min_len) const {
        double s = 0.0;
        for (const auto& [l, c] : hist)
            if (l >= min_len) s += static_cast<double>(l) * static_cast<double>(c);
        return s;
    }
    double count(int min_len) const {
        double s = 0.0;
        for (const auto& [l, c] : hist)
            if (l >= min_len) s += static_cast<double>(c);
        return s;
    }
    int max_len(int min_len) const {
        int m = 0;
        for (const auto& [l, c] : hist)
            if (l >= min_len) m = std::max(m, l);
        return m;
    }
};

}  // namespace

int select_delay(std::span<const double> frame, int d_embed) {
    const auto n = static_cast<long long>(frame.size());
    const int cap = std::max(1, static_cast<int>(n) / std::max(1, d_embed));
    double mean = 0.0;
    for (double v : frame) mean += v;
    mean /= static_cast<double>(n);
    for (int lag = 1; lag <= cap; ++lag) {
        double r = 0.0;
        for (long long t = 0; t + lag < n; ++t)
            r += (frame[t] - mean) * (frame[t + lag] - mean);
        if (r <= 0.0) return lag;
    }
    return cap;
}

PhaseTrajectory time_delay_embed(std::span<const double> frame, int tau, int d_embed) {
    if (tau < 1 || d_embed < 1) throw UserError("time_delay_embed: tau and d must be >= 1");
    const auto n = static_cast<long long>(frame.size());
    const long long nv = n - static_cast<long long>(d_embed - 1) * tau;
    if (nv < 2)
        throw UserError("time_delay_embed: frame too short for tau=" + std::to_string(tau) +
                        ", d=" + std::to_string(d_embed));
    PhaseTrajectory traj;
    traj.tau = tau;
    traj.d_embed = d_embed;
    traj.points = Matrix(static_cast<std::size_t>(nv), static_cast<std::size_t>(d_embed));
    for (long long i = 0; i < nv; ++i)
        for (int c = 0; c < d_embed; ++c)
            traj.points(static_cast<std::size_t>(i), static_cast<std::size_t>(c)) =
                frame[static_cast<std::size_t>(i + static_cast<long long>(c) * tau)];
    return traj;
}

RecurrencePlot recurrence_plot(const PhaseTrajectory& traj, const RqaConfig& cfg) {
    const std::size_t n = traj.points.rows();
    if (n < 2) throw UserError("recurrence_plot: need at least 2 phase points");
    const Matrix d = pairwise_distances(traj.points, Metric::euclidean);

    double eps = cfg.epsilon_value;
    if (cfg.epsilon_rule == RqaConfig::EpsRule::fraction_of_max) {
        double maxd = 0.0;
        for (double v : d.data()) maxd = std::max(maxd, v);
        eps = cfg.epsilon_value * maxd;
    } else if (cfg.epsilon_rule == RqaConfig::EpsRule::target_rr) {
        std::vector<double> off;
        off.reserve(n * (n - 1) / 2);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off.push_back(d(i, j));
        eps = quantile(std::move(off), cfg.epsilon_value);
    }

    RecurrencePlot plot;
    plot.n = n;
    plot.epsilon = eps;
    plot.r.assign(n * n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            plot.r[i * n + j] = (d(i, j) <= eps) ? 1 : 0;
    return plot;
}

RqaMeasures rqa_measures(const RecurrencePlot& plot, const RqaConfig& cfg) {
    const std::size_t n = plot.n;
    RqaMeasures out;

    long long recurrent = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && plot.at(i, j)) ++recurrent;
    out.rr = static_cast<double>(recurrent) / static_cast<double>(n * n - n);

    // diagonal lines over the upper triangle (Theiler window 1)
    LineStats diag;
    for (std::size_t o = 1; o < n; ++o) {
        int run = 0;
        for (std::size_t i = 0; i + o < n; ++i) {
            if (plot.at(i, i + o)) {
                ++run;
            } else {
                diag.add_run(run);
                run = 0;
            }
        }
        diag.add_run(run);
    }
    // vertical lines over full columns, main-diagonal cell excluded
    LineStats vert;
    for (std::size_t j = 0; j < n; ++j) {
        int run = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i != j && plot.at(i, j)) {
                ++run;
            } else {
                vert.add_run(run);
                run = 0;
            }
        }
        vert.add_run(run);
    }

    const double diag_all = diag.sum_len(1);
    const double diag_min = diag.sum_len(cfg.l_min);
    out.det = diag_all > 0.0 ? diag_min / diag_all : 0.0;
    const double diag_cnt = diag.count(cfg.l_min);
    out.l_mean = diag_cnt > 0.0 ? diag_min / diag_cnt : 0.0;
    out.l_max = static_cast<double>(diag.max_len(cfg.l_min));
    if (diag_cnt > 0.0) {
        double entr = 0.0;
        for (const auto& [l, c] : diag.hist)
            if (l >= cfg.l_min) {
                const double p = static_cast<double>(c) / diag_cnt;
                entr -= p * std::log(p);
            }
        out.entr = entr;
    }

    const double vert_all = vert.sum_len(1);
    const double vert_min = vert.sum_len(cfg.v_min);
    out.lam = vert_all > 0.0 ? vert_min / vert_all : 0.0;
    const double vert_cnt = vert.count(cfg.v_min);
    out.tt = vert_cnt > 0.0 ? vert_min / vert_cnt : 0.0;
    out.v_max = static_cast<double>(vert.max_len(cfg.v_min));
    return out;
}

std::pair<std::vector<double>, std::vector<std::string>> extract_rqa_features(
    const AudioClip& clip, const RqaConfig& cfg) {
    validate_config(cfg);
    if (clip.sample_rate <= 0) throw UserError("rqa: invalid sample rate");
    const auto frame_samples =
        static_cast<std::size_t>(std::lround(cfg.frame_len * clip.sample_rate));
    const auto hop_samples = static_cast<std::size_t>(std::lround(cfg.hop * clip.sample_rate));
    if (frame_samples < 4 || hop_samples < 1) throw UserError("rqa: frame/hop too short");
    if (clip.samples.size() < frame_samples)
        throw UserError("rqa: clip shorter than one frame");
    const std::size_t num_frames = 1 + (clip.samples.size() - frame_samples) / hop_samples;

    const auto num_measures = rqa_measure_names().size();
    Matrix per_frame(num_frames, num_measures);
#pragma omp parallel for schedule(dynamic)
    for (long long ff = 0; ff < static_cast<long long>(num_frames); ++ff) {
        const auto f = static_cast<std::size_t>(ff);
        const std::span<const double> frame(clip.samples.data() + f * hop_samples,
                                            frame_samples);
        int tau = cfg.delay_tau > 0 ? cfg.delay_tau : select_delay(frame, cfg.d_embed);
        // keep the trajectory non-empty for any tau choice
        const int max_tau =
            cfg.d_embed > 1 ? static_cast<int>((frame_samples - 2) / (cfg.d_embed - 1)) : tau;
        tau = std::clamp(tau, 1, std::max(1, max_tau));
        const auto traj = time_delay_embed(frame, tau, cfg.d_embed);
        const auto plot = recurrence_plot(traj, cfg);
        const auto m = rqa_measures(plot, cfg);
        const double vals[] = {m.rr, m.det, m.l_mean, m.l_max, m.entr, m.lam, m.tt, m.v_max};
        for (std::size_t c = 0; c < num_measures; ++c) per_frame(f, c) = vals[c];
    }

    std::vector<double> features;
    std::vector<std::string> names;
    for (std::size_t c = 0; c < num_measures; ++c) {
        std::vector<double> v(num_frames);
        for (std::size_t f = 0; f < num_frames; ++f) v[f] = per_frame(f, c);
        std::vector<double> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        const double sd = v.size() > 1 ? std::sqrt(var / (v.size() - 1)) : 0.0;
        const double vmin = sorted.front(), vmax = sorted.back();
        const double median = (v.size() % 2 == 1)
                                  ? sorted[v.size() / 2]
                                  : 0.5 * (sorted[v.size() / 2 - 1] + sorted[v.size() / 2]);
        const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
        const double skew = sd > 0.0 ? (mean - median) / sd : 0.0;
        const double funcs[] = {mean, sd, vmin, vmax, median, iqr, skew};
        for (std::size_t fi = 0; fi < rqa_functional_names().size(); ++fi) {
            features.push_back(funcs[fi]);
            names.push_back("rqa_" + rqa_measure_names()[c] + "_" + rqa_functional_names()[fi]);
        }
    }
    return {std::move(features), std::move(names)};
}

}  // namespace ser
