#pragma once

#include "tubeflow/curvature.hpp"
#include "tubeflow/grid.hpp"
#include "tubeflow/parallel.hpp"
#include "tubeflow/potentials.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tubeflow {

enum class BoundaryMode { Periodic, FrozenWindow };

struct FlowGrid {
    BoundaryMode mode = BoundaryMode::Periodic;
    int points = 64;          // nodes per axis
    Vec lo, hi;               // window corners (window mode only)
    // Window ring update: hold Psi at its initial values, hold dPsi/dt at its
    // initial value, or evolve with the exact base Hessian plus the u-Hessian
    // of the nearest evolved node.
    enum class Ring { Values, Rate, Extrapolate } ring = Ring::Extrapolate;
};

// Psi = base + u. The base is a closed-form handle whose jets are exact; u is
// the grid part evolved by the flow. Torus runs use base = x^T A x / 2 with u
// periodic; window runs start from u = 0 with the catalog potential as base.
class FlowState {
public:
    GridSpec grid;
    BoundaryMode mode = BoundaryMode::Periodic;
    double lambda = 0.0;
    double t = 0.0;
    int frozen_width = 2;
    PotentialHandle base;
    std::vector<double> u;

    int dim() const { return grid.n; }
    double psi(size_t id) const { return base_value_[id] + u[id]; }
    bool active(size_t id) const { return active_[id] != 0; }
    // Exact base jet plus the finite-difference jet of u at a node (stencil radius 2).
    PotentialJet node_jet(size_t id) const;
    // Hess Psi at a node with the 3-point second difference of u.
    Mat node_hessian(size_t id) const;
    // Same Hessian from the neighbour table for a trial u, written row-major to hm.
    void fd_hessian(size_t id, const std::vector<double>& u, double* hm) const;
    // Distance (in nodes) from the grid edge; large for periodic grids.
    int edge_distance(size_t id) const;
    GridFile checkpoint() const;

    friend FlowState init_flow(const PotentialHandle&, const FlowGrid&, double);
    friend std::vector<double> flow_rhs(const FlowState&, const std::vector<double>&, Exec);

private:
    std::vector<double> base_value_;
    std::vector<double> base_hess_;  // n*n per node
    std::vector<char> active_;       // evolved nodes
    std::vector<double> ring_rate_;  // dPsi/dt on frozen nodes (Values, Rate)
    std::vector<int> ring_source_;   // nearest evolved node (Extrapolate), else -1
    std::vector<int> nbr_;           // per node: 2n axis neighbours then 4 per axis pair
    int nbr_count_ = 0;
    int wrap(int i, int d) const;
    size_t neighbour(size_t id, const std::vector<int>& off) const;
};

// Throws NotConvexHere, IncompatibleMode (torus without a periodic split, or a
// window handle on a torus), OutOfDomain (window leaves the domain).
FlowState init_flow(const PotentialHandle& handle, const FlowGrid& grid, double lambda = 0.0);

// 2 log det Hess Psi - lambda Psi on evolved nodes; ring nodes follow FlowGrid::Ring.
// Throws StabilityFailure when a Hessian is not PD or a value is not finite.
std::vector<double> flow_rhs(const FlowState& s, const std::vector<double>& u, Exec exec = Exec::Parallel);

// 0.25 h^2 / (2 max lambda_max(Hess^-1)) over evolved nodes; SingularHessian.
double adaptive_dt(const FlowState& s);

// One RK4 step with dt = min(adaptive_dt, dt_cap); returns the step used.
double flow_step(FlowState& s, double dt_cap = 1e300, Exec exec = Exec::Parallel);

// Coefficient of cos(2 pi k.x) in u (torus grids; k integer).
double mode_amplitude(const FlowState& s, const Vec& k);

struct MonitorSpec {
    int every = 50;     // steps between monitor epochs
    int epochs = 0;     // when > 0, every is set so about this many epochs span the run
    int stride = 1;     // monitor every stride-th node per axis
    uint64_t seed = 7;  // extremizer seed
    bool curvature = true;
};

struct Witness {
    Vec x, v, w;
    double value = 0.0;
};

struct MonitorSeries {
    std::vector<double> times;
    std::map<std::string, std::vector<double>> channels;
    std::vector<Witness> abc_max_witness, orth_min_witness;
    std::vector<long> monitored;  // node count per epoch
    double K = 0.0;               // from the initial S_min; +inf when S_min(0) >= 0
    std::vector<std::string> notes;
    static const std::vector<std::string>& csv_channels();
};

struct FlowRun {
    FlowState state;
    MonitorSeries series;
    long steps = 0;
    std::optional<std::string> failure;  // StabilityFailure message, series is partial
};

FlowRun run_flow(FlowState state, double T, const MonitorSpec& spec, Exec exec = Exec::Parallel);

// t,S_min,S_max,ABC_max,ORTH_ABC_min,H_pol_min,O_max,chen_residual
void write_monitor_csv(std::ostream& out, const MonitorSeries& s);

struct KrVerdict {
    bool weakly_regular = false;
    double epsilon = 0.0;
    double worst = 0.0;  // smallest ORTH_ABC_min on (0, eps]
    std::optional<double> first_violation_t;
    Witness witness;
    double tolerance = 1e-6;
    std::string label() const;
};

KrVerdict kr_probe(const PotentialHandle& handle, double epsilon, const FlowGrid& grid, const MonitorSpec& spec,
                   double tolerance = 1e-6, Exec exec = Exec::Parallel);

}  // namespace tubeflow
