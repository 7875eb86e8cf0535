#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "ser/errors.hpp"
#include "ser/rqa.hpp"

using ser::Matrix;
using ser::RecurrencePlot;
using ser::RqaConfig;

namespace {

ser::AudioClip sine_clip(double freq, int rate = 8000, double secs = 0.5) {
    ser::AudioClip clip;
    clip.sample_rate = rate;
    const int n = static_cast<int>(rate * secs);
    for (int i = 0; i < n; ++i)
        clip.samples.push_back(0.8 * std::sin(2 * M_PI * freq * i / rate));
    return clip;
}

ser::AudioClip noise_clip(unsigned seed, int rate = 8000, double secs = 0.5) {
    ser::AudioClip clip;
    clip.sample_rate = rate;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    for (int i = 0; i < rate / 2; ++i) clip.samples.push_back(u(rng));
    (void)secs;
    return clip;
}

// Independent full-scan oracle over every maximal diagonal / vertical line.
ser::RqaMeasures measures_oracle(const RecurrencePlot& plot, const RqaConfig& cfg) {
    const std::size_t n = plot.n;
    ser::RqaMeasures m;
    long long recur = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && plot.at(i, j)) ++recur;
    m.rr = n > 1 ? static_cast<double>(recur) / static_cast<double>(n * n - n) : 0.0;

    // diagonal lines in the upper triangle (offset >= 1)
    std::vector<long long> diag_hist(n + 1, 0);
    for (std::size_t off = 1; off < n; ++off) {
        std::size_t run = 0;
        for (std::size_t i = 0; i + off < n; ++i) {
            if (plot.at(i, i + off))
                ++run;
            else {
                if (run > 0) ++diag_hist[run];
                run = 0;
            }
        }
        if (run > 0) ++diag_hist[run];
    }
    // vertical lines per column, skipping the main-diagonal cell
    std::vector<long long> vert_hist(n + 1, 0);
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t run = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool on = i != j && plot.at(i, j);
            if (on)
                ++run;
            else {
                if (run > 0) ++vert_hist[run];
                run = 0;
            }
        }
        if (run > 0) ++vert_hist[run];
    }

    auto weighted = [&](const std::vector<long long>& h, std::size_t lo) {
        double s = 0;
        for (std::size_t l = lo; l <= n; ++l) s += static_cast<double>(l) * h[l];
        return s;
    };
    const double diag_all = weighted(diag_hist, 1);
    const double diag_long = weighted(diag_hist, cfg.l_min);
    m.det = diag_all > 0 ? diag_long / diag_all : 0.0;
    double cnt = 0;
    for (std::size_t l = cfg.l_min; l <= n; ++l) cnt += static_cast<double>(diag_hist[l]);
    m.l_mean = cnt > 0 ? diag_long / cnt : 0.0;
    for (std::size_t l = n; l >= static_cast<std::size_t>(cfg.l_min); --l)
        if (diag_hist[l] > 0) {
            m.l_max = static_cast<double>(l);
            break;
        }
    if (cnt > 0)
        for (std::size_t l = cfg.l_min; l <= n; ++l)
            if (diag_hist[l] > 0) {
                const double p = static_cast<double>(diag_hist[l]) / cnt;
                m.entr -= p * std::log(p);
            }

    const double vert_all = weighted(vert_hist, 1);
    const double vert_long = weighted(vert_hist, cfg.v_min);
    m.lam = vert_all > 0 ? vert_long / vert_all : 0.0;
    double vcnt = 0;
    for (std::size_t l = cfg.v_min; l <= n; ++l) vcnt += static_cast<double>(vert_hist[l]);
    m.tt = vcnt > 0 ? vert_long / vcnt : 0.0;
    for (std::size_t l = n; l >= static_cast<std::size_t>(cfg.v_min); --l)
        if (vert_hist[l] > 0) {
            m.v_max = static_cast<double>(l);
            break;
        }
    return m;
}

}  // namespace

TEST_CASE("time_delay_embed: counting and identity") {
    std::vector<double> frame(20);
    for (int i = 0; i < 20; ++i) frame[i] = i;
    const auto traj = ser::time_delay_embed(frame, 2, 3);
    CHECK(traj.points.rows() == 16);  // n - (d-1)*tau
    CHECK(traj.points(0, 2) == 4.0);

    const auto flat = ser::time_delay_embed(frame, 1, 1);
    REQUIRE(flat.points.rows() == 20);
    for (int i = 0; i < 20; ++i) CHECK(flat.points(i, 0) == frame[i]);

    CHECK_THROWS_AS(ser::time_delay_embed(std::vector<double>{1.0, 2.0}, 3, 4), ser::UserError);
}

TEST_CASE("time_delay_embed: sine at quarter-period delay lies on a circle") {
    const int rate = 8000;
    const double freq = 100.0;
    const int quarter = rate / static_cast<int>(4 * freq);
    std::vector<double> frame(400);
    for (int i = 0; i < 400; ++i) frame[i] = std::sin(2 * M_PI * freq * i / rate);
    const auto traj = ser::time_delay_embed(frame, quarter, 2);
    std::vector<double> radii;
    for (std::size_t i = 0; i < traj.points.rows(); ++i)
        radii.push_back(std::hypot(traj.points(i, 0), traj.points(i, 1)));
    double mean = 0;
    for (double r : radii) mean += r;
    mean /= static_cast<double>(radii.size());
    double var = 0;
    for (double r : radii) var += (r - mean) * (r - mean);
    const double sd = std::sqrt(var / static_cast<double>(radii.size()));
    CHECK(sd < 0.01 * mean);
}

TEST_CASE("recurrence_plot: threshold extremes and brute-force oracle") {
    ser::PhaseTrajectory traj;
    traj.points = test::random_matrix(40, 3, 90);
    traj.d_embed = 3;
    traj.tau = 1;

    RqaConfig big;
    big.epsilon_rule = RqaConfig::EpsRule::fixed;
    big.epsilon_value = 1e9;
    const auto all = ser::recurrence_plot(traj, big);
    for (std::size_t i = 0; i < 40; ++i)
        for (std::size_t j = 0; j < 40; ++j) CHECK(all.at(i, j) == 1);

    RqaConfig tiny = big;
    tiny.epsilon_value = 1e-12;
    const auto id = ser::recurrence_plot(traj, tiny);
    for (std::size_t i = 0; i < 40; ++i)
        for (std::size_t j = 0; j < 40; ++j) CHECK(id.at(i, j) == (i == j ? 1 : 0));

    for (double eps : {0.5, 1.0, 2.0}) {
        RqaConfig cfg = big;
        cfg.epsilon_value = eps;
        const auto plot = ser::recurrence_plot(traj, cfg);
        for (std::size_t i = 0; i < 40; ++i)
            for (std::size_t j = 0; j < 40; ++j) {
                double s = 0;
                for (int c = 0; c < 3; ++c) {
                    const double d = traj.points(i, c) - traj.points(j, c);
                    s += d * d;
                }
                CHECK(plot.at(i, j) == (std::sqrt(s) <= eps ? 1 : 0));
                CHECK(plot.at(i, j) == plot.at(j, i));
            }
        CHECK(plot.at(7, 7) == 1);
    }
}

TEST_CASE("recurrence rate is monotone in epsilon") {
    ser::PhaseTrajectory traj;
    traj.points = test::random_matrix(30, 2, 91);
    traj.d_embed = 2;
    traj.tau = 1;
    double prev = -1.0;
    for (double eps = 0.1; eps < 4.0; eps += 0.2) {
        RqaConfig cfg;
        cfg.epsilon_rule = RqaConfig::EpsRule::fixed;
        cfg.epsilon_value = eps;
        const auto m = ser::rqa_measures(ser::recurrence_plot(traj, cfg), cfg);
        CHECK(m.rr >= prev);
        prev = m.rr;
    }
}

TEST_CASE("rqa_measures: closed-form extremes") {
    RqaConfig cfg;
    const std::size_t n = 8;
    RecurrencePlot ones;
    ones.n = n;
    ones.r.assign(n * n, 1);
    const auto m1 = ser::rqa_measures(ones, cfg);
    CHECK(m1.rr == 1.0);
    // the two length-1 corner diagonals keep DET just below 1 on finite plots:
    // sum_{l>=2} l / sum_{l>=1} l over lengths 1..n-1
    CHECK(m1.det == doctest::Approx(27.0 / 28.0).epsilon(1e-14));
    CHECK(m1.l_max == static_cast<double>(n - 1));

    RecurrencePlot id;
    id.n = n;
    id.r.assign(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) id.r[i * n + i] = 1;
    const auto m0 = ser::rqa_measures(id, cfg);
    CHECK(m0.rr == 0.0);
    CHECK(m0.det == 0.0);
    CHECK(m0.lam == 0.0);
    CHECK(m0.l_max == 0.0);
}

TEST_CASE("rqa_measures: hand-built 6x6 plot matches the line-enumeration oracle") {
    RqaConfig cfg;
    RecurrencePlot plot;
    plot.n = 6;
    plot.r.assign(36, 0);
    auto set = [&](std::size_t i, std::size_t j) {
        plot.r[i * 6 + j] = plot.r[j * 6 + i] = 1;
    };
    for (std::size_t i = 0; i < 6; ++i) plot.r[i * 6 + i] = 1;
    // one length-3 diagonal at offset 2 and one extra vertical run
    set(0, 2);
    set(1, 3);
    set(2, 4);
    set(0, 5);
    set(1, 5);  // vertical pair in column 5 (rows 0-1)
    const auto got = ser::rqa_measures(plot, cfg);
    const auto want = measures_oracle(plot, cfg);
    CHECK(got.rr == want.rr);
    CHECK(got.det == want.det);
    CHECK(got.l_mean == want.l_mean);
    CHECK(got.l_max == want.l_max);
    CHECK(got.entr == want.entr);
    CHECK(got.lam == want.lam);
    CHECK(got.tt == want.tt);
    CHECK(got.v_max == want.v_max);
}

TEST_CASE("rqa_measures: random plots match the oracle") {
    std::mt19937 rng(92);
    std::bernoulli_distribution coin(0.3);
    for (int rep = 0; rep < 10; ++rep) {
        RecurrencePlot plot;
        plot.n = 12;
        plot.r.assign(144, 0);
        for (std::size_t i = 0; i < 12; ++i) {
            plot.r[i * 12 + i] = 1;
            for (std::size_t j = i + 1; j < 12; ++j)
                if (coin(rng)) plot.r[i * 12 + j] = plot.r[j * 12 + i] = 1;
        }
        RqaConfig cfg;
        const auto got = ser::rqa_measures(plot, cfg);
        const auto want = measures_oracle(plot, cfg);
        CHECK(got.rr == doctest::Approx(want.rr).epsilon(1e-14));
        CHECK(got.det == doctest::Approx(want.det).epsilon(1e-14));
        CHECK(got.l_mean == doctest::Approx(want.l_mean).epsilon(1e-14));
        CHECK(got.l_max == want.l_max);
        CHECK(got.entr == doctest::Approx(want.entr).epsilon(1e-12));
        CHECK(got.lam == doctest::Approx(want.lam).epsilon(1e-14));
        CHECK(got.tt == doctest::Approx(want.tt).epsilon(1e-14));
        CHECK(got.v_max == want.v_max);
    }
}

TEST_CASE("extract_rqa_features: shape, names, determinism") {
    const auto clip = sine_clip(220.0);
    RqaConfig cfg;
    const auto [features, names] = ser::extract_rqa_features(clip, cfg);
    CHECK(features.size() == 56);  // 8 measures x 7 functionals
    CHECK(names.size() == 56);
    CHECK(names[0] == "rqa_RR_mean");
    CHECK(names[55] == "rqa_V_max_skewproxy");
    for (double v : features) CHECK(std::isfinite(v));

    const auto again = ser::extract_rqa_features(clip, cfg);
    CHECK(again.first == features);
}

TEST_CASE("extract_rqa_features: constant clip stays finite") {
    ser::AudioClip clip;
    clip.sample_rate = 8000;
    clip.samples.assign(4000, 0.25);
    const auto [features, names] = ser::extract_rqa_features(clip, RqaConfig{});
    for (double v : features) CHECK(std::isfinite(v));
}

TEST_CASE("extract_rqa_features: sine is more deterministic than noise") {
    RqaConfig cfg;
    const auto sine = ser::extract_rqa_features(sine_clip(220.0), cfg);
    const auto noise = ser::extract_rqa_features(noise_clip(93), cfg);
    std::size_t det_mean = 0;
    for (std::size_t i = 0; i < sine.second.size(); ++i)
        if (sine.second[i] == "rqa_DET_mean") det_mean = i;
    CHECK(sine.first[det_mean] > noise.first[det_mean]);
}

TEST_CASE("extract_rqa_features: clip shorter than one frame is rejected") {
    ser::AudioClip clip;
    clip.sample_rate = 8000;
    clip.samples.assign(10, 0.0);
    CHECK_THROWS_AS(ser::extract_rqa_features(clip, RqaConfig{}), ser::UserError);
}
