#pragma once

#include "tubeflow/berger.hpp"
#include "tubeflow/reaction.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tubeflow {

// Randomized suites shared by the command line runner and the acceptance
// binary. Every suite is seeded and its result does not depend on the thread
// count.

// Writes v into every entry of the symmetry orbit of (i,j,k,l).
void set_orbit(Tensor4& t, int i, int j, int k, int l, double v);

// Frame tensor of a catalog potential at a random point of its domain.
Tensor4 engine_tensor(const std::string& name, int n, std::mt19937_64& rng);

struct NullVectorSuite {
    long trials = 0, failures = 0;
    long engine_sources = 0;
    double worst_q = 0.0;        // max Q / |A|^2
    double worst_sharper = 0.0;  // max (Q + Tr M1M2) / |A|^2
    double worst_first = 0.0;    // max first-derivative identity / |A|
    double worst_h = 0.0;        // min eigenvalue of -H over |A|
    std::optional<Tensor4> first_failure;
    std::string failure_note;
};
// Even trials shift a random tensor to the boundary, odd trials a catalog
// frame tensor; dimensions cycle through 2..4 (catalog tensors keep their own).
NullVectorSuite null_vector_suite(long trials, uint64_t seed, Exec exec = Exec::Parallel);

struct TraceSuite {
    long trials = 0;
    double min_value = 0.0;
    double worst_charpoly_gap = 0.0;
    double worst_similarity_gap = 0.0;
    double footnote_value = 0.0;
    BlockInstance min_instance;
};
TraceSuite trace_suite(long trials, int n_max, uint64_t seed, Exec exec = Exec::Parallel);
BlockInstance footnote_instance();

// n = 2 tensor with A_1212 = 0 and A_1211 = A_1222.
Tensor4 noab_constrained_tensor(std::mt19937_64& rng);
struct NoabIdentity {
    long trials = 0;
    double worst_gap = 0.0;  // max |Q_1212 - 4 A_1112^2|
};
NoabIdentity noab_identity_suite(long trials, uint64_t seed);

struct PolarizationSuite {
    long trials = 0, violations = 0;
    double worst_excess = 0.0;
};
PolarizationSuite polarization_suite(long trials, uint64_t seed, Exec exec = Exec::Parallel);

struct OdeCheck {
    double negative_error = 0.0;  // |A(0.5) + 0.5| from A0 = -1
    double pole_predicted = 0.5, pole_found = 0.0;
    double pole_rel_error = 0.0;
    double max_drift = 0.0;
};
OdeCheck ode_closed_form_check(double dt = 1e-3);

struct BergerSuite {
    std::vector<SphereMoments> moments;
    bool moments_ok = false;
    DecompositionFit calabi_fit;  // calabi batch only, reported
    DecompositionFit pooled_fit;  // all catalog potentials
    bool decomposition_ok = false;  // three-term pooled fit within 3 standard errors
    std::vector<std::string> batch_names;
    std::vector<FifthReport> fifth;  // every point of every batch
    std::vector<int> fifth_batch;
    bool fifth_ok = false;
    std::vector<RicciAverage> ricci;
    double ricci_mean = 0.0, ricci_spread = 0.0, ricci_error = 0.0;
    bool ricci_ok = false;
    bool ok() const { return moments_ok && decomposition_ok && fifth_ok && ricci_ok; }
};
struct BergerSpec {
    long moment_samples = 1000000;
    long row_samples = 200000;
    long ricci_samples = 200000;
    uint64_t seed = 5;
};
BergerSuite berger_suite(const BergerSpec& spec, Exec exec = Exec::Parallel);

}  // namespace tubeflow
