#pragma once

#include <string>
#include <vector>

#include "hks/solver.hpp"

namespace hks {

struct ConeSpec {
    std::vector<double> center;
    double A = 1.0;
    double T_star = 0.0;
    double speed = 0.0;  // 6 A d
};

ConeSpec make_cone(const std::vector<double>& center, double A, double T_star);

// 1 + sup rho of the second run + sup |grad log c| of the first, each over its recorded steps.
double compute_A(const RunResult& run1, const RunResult& run2);

// Largest difference of (rho, q, log c) between the two initial states on the ball
// |x - center| <= speed * T_star.
double initial_ball_difference(const SimState& a, const SimState& b, const ConeSpec& cone);

struct ConeReport {
    bool cone_violation = false;
    double max_diff_rho = 0.0;
    double max_diff_q = 0.0;
    double max_diff_log_c = 0.0;
    int samples_checked = 0;
    double empirical_front_speed = 0.0;
    std::vector<double> front_times;
    std::vector<double> front_upper;  // outermost separated coordinate along axis 0, upper side
    std::vector<double> front_lower;
    std::string note;
};

// Compares the stored samples of two runs taken at identical times. Inside the cross-section
// |x - center| <= speed (T_star - t) the fields must agree to tol; the outermost positions where
// |rho1 - rho2| > tol give the empirical front speed through a Theil-Sen line fit.
ConeReport verify_cone(const RunResult& run1, const RunResult& run2, const ConeSpec& cone, double tol);

// Largest characteristic speed seen in the run's step records.
double empirical_speed_bound(const RunResult& run);

// Median of pairwise slopes.
double theil_sen_slope(const std::vector<double>& t, const std::vector<double>& y);

}  // namespace hks
