#pragma once

#include "tubeflow/certificate.hpp"
#include "tubeflow/extremize.hpp"
#include "tubeflow/parallel.hpp"
#include "tubeflow/potentials.hpp"
#include "tubeflow/tensor.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tubeflow {

// Curvature of the tube-domain metric in engine units: h = Hess Psi and
// E_ijkl = Psi^pq Psi_ikp Psi_jlq - Psi_ijkl. The lifted metric is h/4 and the
// Kaehler curvature R_{i j' k l'} equals E/16.
struct CurvatureSample {
    Vec x;
    Mat h;
    Tensor4 E;
    Mat frame;        // columns form the Cholesky h-orthonormal frame
    Tensor4 frame_E;  // E expressed in that frame
};

CurvatureSample core_form(const PotentialJet& jet);
// Same construction for an arbitrary symmetric PD metric and curvature tensor.
CurvatureSample sample_from_tensor(const Vec& x, const Mat& h, const Tensor4& E);

Mat cholesky_frame(const Mat& h);

// E(v, w, v, w), unnormalized.
double anti_bisectional(const CurvatureSample& s, const Vec& v, const Vec& w);
// E(v, w, v, w) / (|v|_h^2 |w|_h^2)
double anti_bisectional_normalized(const CurvatureSample& s, const Vec& v, const Vec& w);
// E(v,v,v,v) / |v|_h^4
double hsc(const CurvatureSample& s, const Vec& v);
// sum E_ijkl X^i conj(X^j) X^k conj(X^l) for X = a + i b
double sectional_raw(const CurvatureSample& s, const Vec& a, const Vec& b);
// sectional_raw / (|a|_h^2 + |b|_h^2)^2
double hsc_full(const CurvatureSample& s, const Vec& a, const Vec& b);

// Ricci form in the h-orthonormal frame, Ric_kl = sum_i E(e_i, e_i, e_k, e_l).
Mat ricci(const CurvatureSample& s);
// Coordinate Ricci form h^ij E_ijkl.
Mat ricci_coordinates(const CurvatureSample& s);
double scalar(const CurvatureSample& s);
// sum_{i != j} E(f_i, f_j, f_i, f_j); rows of frame must be h-orthonormal.
double oab_trace(const CurvatureSample& s, const std::optional<Mat>& frame_rows = std::nullopt);

struct MTWValue {
    double value = 0.0;
    Vec xi, eta;
    Vec x, y;
};

// Cost derivatives of c(x, y) = Psi(x - y) at (x, y).
struct CostJet {
    Mat mixed;          // c_{i,q}: x index i, y index q
    Tensor4 quartic;    // D arranged as A_{i r j s} = (c_{ij,p} c^{p,q} c_{q,rs} - c_{ij,rs})
    Mat raise;          // c^{r,k}: maps a covector eta to zeta^r = c^{r,k} eta_k
};
CostJet cost_jet(const PotentialHandle& handle, const Vec& x, const Vec& y);
MTWValue mtw_tensor(const PotentialHandle& handle, const Vec& x, const Vec& y, const Vec& xi, const Vec& eta);

enum class Quantity { Abc, OrthAbc, HscPol, MtwOrth };
std::string to_string(Quantity q);
Quantity quantity_from_string(const std::string& s);

struct SearchSpec {
    uint64_t seed = 7;
};

// Extrema of one normalized quantity at a single point.
struct PointExtrema {
    double max_value = 0.0, min_value = 0.0;
    Vec max_v, max_w, min_v, min_w;  // coordinate vectors, h-unit
    double tolerance = 0.0;          // 1e-9 (1 + max |E| in the frame)
};
PointExtrema point_extrema(const CurvatureSample& s, Quantity q, const SearchSpec& search = {});
PointExtrema mtw_point_extrema(const PotentialHandle& handle, const Vec& p, const SearchSpec& search = {});

SignCertificate certify_sign(const PotentialHandle& handle, Quantity q, const SampleSpec& region,
                             const SearchSpec& search = {}, Exec exec = Exec::Parallel);
// Builds the verdict from per-point extrema (shared with the flow monitors).
SignCertificate merge_extrema(const std::string& quantity, const std::vector<Vec>& points,
                              const std::vector<PointExtrema>& ex);

struct ScanRow {
    Vec x;
    double S = 0, O = 0, hmin_pol = 0, abc_min = 0;
    Vec witness_v, witness_w;
};
std::vector<ScanRow> curvature_scan(const PotentialHandle& handle, const std::vector<Vec>& points,
                                    const SearchSpec& search = {}, Exec exec = Exec::Parallel);
// Columns x1..xn,S,O,Hmin_pol,ABC_min,v1..vn,w1..wn
void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows);

}  // namespace tubeflow
