#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ser/dataio.hpp"
#include "ser/matrix.hpp"

namespace ser {

struct RqaConfig {
    double frame_len = 0.025;  // seconds
    double hop = 0.010;        // seconds
    int delay_tau = 0;         // samples; 0 selects by first autocorrelation zero crossing
    int d_embed = 3;
    enum class EpsRule { fixed, fraction_of_max, target_rr } epsilon_rule =
        EpsRule::fraction_of_max;
    double epsilon_value = 0.15;  // epsilon itself / fraction rho / target rate r
    int l_min = 2;
    int v_min = 2;
};

struct PhaseTrajectory {
    Matrix points;  // n_v x d_embed
    int tau = 0;
    int d_embed = 0;
};

struct RecurrencePlot {
    std::vector<std::uint8_t> r;  // n x n, symmetric, unit diagonal
    std::size_t n = 0;
    double epsilon = 0.0;

    std::uint8_t at(std::size_t i, std::size_t j) const { return r[i * n + j]; }
};

struct RqaMeasures {
    double rr = 0, det = 0, l_mean = 0, l_max = 0, entr = 0, lam = 0, tt = 0, v_max = 0;
};

inline const std::vector<std::string>& rqa_measure_names() {
    static const std::vector<std::string> names{"RR",   "DET", "L_mean", "L_max",
                                                "ENTR", "LAM", "TT",     "V_max"};
    return names;
}

inline const std::vector<std::string>& rqa_functional_names() {
    static const std::vector<std::string> names{"mean",   "std", "min",      "max",
                                                "median", "iqr", "skewproxy"};
    return names;
}

// First zero crossing of the frame autocorrelation, capped so that the
// embedded trajectory keeps at least frame/d points.
int select_delay(std::span<const double> frame, int d_embed);

PhaseTrajectory time_delay_embed(std::span<const double> frame, int tau, int d_embed);

RecurrencePlot recurrence_plot(const PhaseTrajectory& traj, const RqaConfig& cfg);

RqaMeasures rqa_measures(const RecurrencePlot& plot, const RqaConfig& cfg);

std::pair<std::vector<double>, std::vector<std::string>> extract_rqa_features(
    const AudioClip& clip, const RqaConfig& cfg);

}  // namespace ser
