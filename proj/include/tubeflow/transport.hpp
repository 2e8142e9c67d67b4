#pragma once

#include "tubeflow/flow.hpp"
#include "tubeflow/potentials.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace tubeflow {

struct DiscreteMeasure {
    std::vector<Vec> points;
    std::vector<double> weights;
    // Throws BadParams unless weights are positive, sum to 1 within 1e-12 and
    // the points are distinct.
    void validate() const;
    static DiscreteMeasure uniform(std::vector<Vec> pts);
};

struct TransportPlan {
    Mat coupling;
    Vec u, v;              // dual potentials, u_a + v_b <= C_ab
    double cost = 0.0;
    double dual_value = 0.0;
    double marginal_error = 0.0;   // max deviation from the prescribed marginals
    double dual_infeasibility = 0.0;  // max (u_a + v_b - C_ab)+
    double slackness = 0.0;        // max over coupled cells of |C_ab - u_a - v_b|
    bool certified(double tol = 1e-9) const {
        return marginal_error < 1e-10 && dual_infeasibility < tol && slackness < tol;
    }
};

// C[a][b] = Psi(x_a - y_b); OutOfDomain when a difference leaves the domain.
Mat cost_matrix(const PotentialHandle& handle, const std::vector<Vec>& X, const std::vector<Vec>& Y);
// Same for a flow checkpoint, through the C^2 cubic spline of the grid values.
Mat cost_matrix(const GridFile& checkpoint, const std::vector<Vec>& X, const std::vector<Vec>& Y);

// Successive shortest paths with node potentials on the dense bipartite
// network; the final potentials are the dual certificate. Infeasible when
// the total masses differ.
TransportPlan solve_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Mat& C);

// Image of each source point: the dominant target when every row carries at
// least 0.9 of its mass on one column, else the barycentric projection when
// every row reaches 0.5; otherwise NotDeterministic.
std::vector<Vec> transport_map(const TransportPlan& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// max over a != b in the subset of |T(x_a) - T(x_b)| / |x_a - x_b|^alpha.
double holder_modulus(const TransportPlan& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu, double alpha,
                      const std::vector<int>& subset = {});

double plan_tv(const TransportPlan& a, const TransportPlan& b);

struct OtInstance {
    DiscreteMeasure mu, nu;
};
// CSV rows "set,x1,..,xn,weight" with set in {mu, nu}; a header line is optional.
OtInstance read_instance(std::istream& in);
void write_instance(std::ostream& out, const OtInstance& inst);

// Uniform weights on count seeded uniform points in each box.
OtInstance random_instance(int count, const Vec& mu_lo, const Vec& mu_hi, const Vec& nu_lo, const Vec& nu_hi,
                           uint64_t seed);

struct ContinuityRow {
    double t = 0, cost = 0, modulus = 0, tv = 0;
    double certificate_residual = 0;  // max of marginal, dual and slackness errors
};

// Flows the potential on the window, and at each listed time solves OT for the
// checkpoint cost. Rows follow the order of times (which must be increasing).
std::vector<ContinuityRow> weak_continuity_experiment(const PotentialHandle& handle, const OtInstance& inst,
                                                      const std::vector<double>& times, double alpha,
                                                      const FlowGrid& grid, Exec exec = Exec::Parallel);
// t,cost,holder_modulus,plan_tv_to_t0
void write_continuity_csv(std::ostream& out, const std::vector<ContinuityRow>& rows);

}  // namespace tubeflow
