#pragma once

namespace shp {

enum class MuInit {
    EmpiricalMean,  // mean count per bin / delta
    Fixed,          // FitConfig::mu_init_value
};

struct FitConfig {
    int max_iters = 100;
    double rel_tol = 1e-6;    // relative log-likelihood change that stops the iteration
    double mu_floor = 1e-10;  // lower bound on every immigration rate
    double alpha_init = 0.1;
    MuInit mu_init = MuInit::EmpiricalMean;
    double mu_init_value = 1.0;
    bool self_excitation = true;  // fit the lagged diagonal strengths
    double beta = 1.0;            // kernel decay; +infinity disables lagged terms
};

// Throws ValidationError on out-of-domain fields.
void validate(const FitConfig& cfg);

}  // namespace shp
