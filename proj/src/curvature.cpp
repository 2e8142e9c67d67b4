#include "tubeflow/curvature.hpp"

#include "tubeflow/errors.hpp"

#include <cmath>
#include <complex>
#include <ostream>

namespace tubeflow {

Mat cholesky_frame(const Mat& h) {
    Eigen::LLT<Mat> llt(h);
    if (llt.info() != Eigen::Success) throw SingularHessian("metric is not positive definite");
    Mat L = llt.matrixL();
    // h = L L^T, frame = L^{-T}: frame^T h frame = I
    return L.transpose().triangularView<Eigen::Upper>().solve(Mat::Identity(h.rows(), h.cols()));
}

CurvatureSample sample_from_tensor(const Vec& x, const Mat& h, const Tensor4& E) {
    CurvatureSample s;
    s.x = x;
    s.h = h;
    s.E = E;
    s.frame = cholesky_frame(h);
    s.frame_E = change_basis(E, s.frame);
    symmetrize_curvature(s.frame_E);
    return s;
}

CurvatureSample core_form(const PotentialJet& jet) {
    const int n = static_cast<int>(jet.x.size());
    Eigen::LLT<Mat> llt(jet.hessian);
    if (llt.info() != Eigen::Success || !jet.hessian.allFinite())
        throw SingularHessian("hessian cannot be inverted at " + format_vec(jet.x));
    Mat hinv = llt.solve(Mat::Identity(n, n));
    hinv = 0.5 * (hinv + hinv.transpose()).eval();
    Tensor4 E(n);
    // Evaluate once per symmetry orbit and copy, so the symmetries are exact.
    for (const auto& orbit : curvature_orbits(n)) {
        int id = orbit.front();
        int l = id % n, k = (id / n) % n, j = (id / n / n) % n, i = id / n / n / n;
        double s = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q) s += hinv(p, q) * jet.third(i, k, p) * jet.third(j, l, q);
        s -= jet.fourth(i, j, k, l);
        for (int m : orbit) E.data()[m] = s;
    }
    return sample_from_tensor(jet.x, jet.hessian, E);
}

double anti_bisectional(const CurvatureSample& s, const Vec& v, const Vec& w) { return s.E.abc(v, w); }

double anti_bisectional_normalized(const CurvatureSample& s, const Vec& v, const Vec& w) {
    double nv = v.dot(s.h * v), nw = w.dot(s.h * w);
    if (nv <= 0 || nw <= 0) throw ZeroVector("anti-bisectional curvature needs nonzero vectors");
    return s.E.abc(v, w) / (nv * nw);
}

double hsc(const CurvatureSample& s, const Vec& v) {
    double nv = v.dot(s.h * v);
    if (!(nv > 0)) throw ZeroVector("holomorphic sectional curvature of the zero vector");
    return s.E.abc(v, v) / (nv * nv);
}

double sectional_raw(const CurvatureSample& s, const Vec& a, const Vec& b) {
    const int n = static_cast<int>(a.size());
    using C = std::complex<double>;
    std::vector<C> X(n);
    for (int i = 0; i < n; ++i) X[i] = C(a[i], b[i]);
    C sum = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    sum += s.E(i, j, k, l) * X[i] * std::conj(X[j]) * X[k] * std::conj(X[l]);
    return sum.real();
}

double hsc_full(const CurvatureSample& s, const Vec& a, const Vec& b) {
    double nx = a.dot(s.h * a) + b.dot(s.h * b);
    if (!(nx > 0)) throw ZeroVector("holomorphic sectional curvature of the zero vector");
    return sectional_raw(s, a, b) / (nx * nx);
}

Mat ricci(const CurvatureSample& s) {
    const int n = s.E.dim();
    Mat r = Mat::Zero(n, n);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
            for (int i = 0; i < n; ++i) r(k, l) += s.frame_E(i, i, k, l);
    return r;
}

Mat ricci_coordinates(const CurvatureSample& s) {
    const int n = s.E.dim();
    Mat hinv = s.frame * s.frame.transpose();
    Mat r = Mat::Zero(n, n);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) r(k, l) += hinv(i, j) * s.E(i, j, k, l);
    return r;
}

double scalar(const CurvatureSample& s) { return ricci(s).trace(); }

double oab_trace(const CurvatureSample& s, const std::optional<Mat>& frame_rows) {
    const int n = s.E.dim();
    if (!frame_rows) {
        double o = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) o += s.frame_E(i, j, i, j);
        return o;
    }
    const Mat& F = *frame_rows;
    if (F.rows() != n || F.cols() != n) throw BadFrame("frame has the wrong shape");
    Mat gram = F * s.h * F.transpose();
    if ((gram - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
        throw BadFrame("frame rows are not h-orthonormal");
    double o = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) o += s.E.abc(F.row(i).transpose(), F.row(j).transpose());
    return o;
}

CostJet cost_jet(const PotentialHandle& handle, const Vec& x, const Vec& y) {
    const int n = handle.dim();
    Vec d = x - y;
    if (!handle.domain.contains(d))
        throw OutOfDomain(handle.name + ": x - y = " + format_vec(d) + " outside the domain");
    const auto& basis = TaylorBasis::get(2 * n);
    std::vector<Taylor> arg;
    for (int i = 0; i < n; ++i)
        arg.push_back(Taylor::variable(basis, i, x[i]) - Taylor::variable(basis, n + i, y[i]));
    Taylor c = handle.expand(arg);
    CostJet cj;
    cj.mixed = Mat(n, n);
    for (int i = 0; i < n; ++i)
        for (int q = 0; q < n; ++q) cj.mixed(i, q) = c.derivative({i, n + q});
    Eigen::FullPivLU<Mat> lu(cj.mixed);
    if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-300)
        throw SingularMixedHessian("mixed cost hessian is singular at " + format_vec(d));
    Mat binv = lu.inverse();  // binv(y index, x index)
    cj.raise = binv;
    cj.quartic = Tensor4(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int r = 0; r < n; ++r)
                for (int s = 0; s < n; ++s) {
                    double v = 0.0;
                    for (int p = 0; p < n; ++p)
                        for (int q = 0; q < n; ++q)
                            v += c.derivative({i, j, n + p}) * binv(p, q) * c.derivative({q, n + r, n + s});
                    v -= c.derivative({i, j, n + r, n + s});
                    cj.quartic(i, r, j, s) = v;
                }
    return cj;
}

MTWValue mtw_tensor(const PotentialHandle& handle, const Vec& x, const Vec& y, const Vec& xi, const Vec& eta) {
    CostJet cj = cost_jet(handle, x, y);
    Vec zeta = cj.raise * eta;
    MTWValue m;
    m.value = cj.quartic.abc(xi, zeta);
    m.xi = xi;
    m.eta = eta;
    m.x = x;
    m.y = y;
    return m;
}

std::string to_string(Quantity q) {
    switch (q) {
        case Quantity::Abc: return "ABC";
        case Quantity::OrthAbc: return "ORTH_ABC";
        case Quantity::HscPol: return "HSC_POL";
        case Quantity::MtwOrth: return "MTW_ORTH";
    }
    return "?";
}

Quantity quantity_from_string(const std::string& s) {
    if (s == "ABC") return Quantity::Abc;
    if (s == "ORTH_ABC") return Quantity::OrthAbc;
    if (s == "HSC_POL") return Quantity::HscPol;
    if (s == "MTW_ORTH") return Quantity::MtwOrth;
    throw UnknownName("unknown curvature quantity '" + s + "'");
}

namespace {

PairMode mode_of(Quantity q) {
    switch (q) {
        case Quantity::Abc: return PairMode::Abc;
        case Quantity::HscPol: return PairMode::Diag;
        default: return PairMode::Orth;
    }
}

PointExtrema extrema_in_frame(const Tensor4& F, const Mat& frame, PairMode mode, const SearchSpec& search) {
    PointExtrema e;
    PairExtremum mx = extremize_pairs(F, mode, true, search.seed);
    PairExtremum mn = extremize_pairs(F, mode, false, search.seed);
    e.max_value = mx.value;
    e.min_value = mn.value;
    e.max_v = frame * mx.a;
    e.max_w = frame * mx.b;
    e.min_v = frame * mn.a;
    e.min_w = frame * mn.b;
    e.tolerance = 1e-9 * (1.0 + F.max_abs());
    return e;
}

}  // namespace

PointExtrema point_extrema(const CurvatureSample& s, Quantity q, const SearchSpec& search) {
    if (q == Quantity::MtwOrth) throw BadParams("MTW extrema need the potential handle");
    return extrema_in_frame(s.frame_E, s.frame, mode_of(q), search);
}

PointExtrema mtw_point_extrema(const PotentialHandle& handle, const Vec& p, const SearchSpec& search) {
    CostJet cj = cost_jet(handle, p, Vec::Zero(p.size()));
    Mat g = -0.5 * (cj.mixed + cj.mixed.transpose());
    Mat frame = cholesky_frame(g);
    Tensor4 F = change_basis(cj.quartic, frame);
    return extrema_in_frame(F, frame, PairMode::Orth, search);
}

SignCertificate merge_extrema(const std::string& quantity, const std::vector<Vec>& points,
                              const std::vector<PointExtrema>& ex) {
    SignCertificate c;
    c.quantity = quantity;
    c.samples = static_cast<long>(points.size());
    if (points.empty()) throw BadParams("no sample points to certify");
    size_t imax = 0, imin = 0;
    for (size_t i = 1; i < ex.size(); ++i) {
        if (ex[i].max_value > ex[imax].max_value) imax = i;
        if (ex[i].min_value < ex[imin].min_value) imin = i;
    }
    c.max_value = ex[imax].max_value;
    c.max_x = points[imax];
    c.max_v = ex[imax].max_v;
    c.max_w = ex[imax].max_w;
    c.min_value = ex[imin].min_value;
    c.min_x = points[imin];
    c.min_v = ex[imin].min_v;
    c.min_w = ex[imin].min_w;
    double tol_max = ex[imax].tolerance, tol_min = ex[imin].tolerance;
    bool nonpos = c.max_value <= tol_max;
    bool nonneg = c.min_value >= -tol_min;
    bool use_max;
    if (nonpos && nonneg) {
        c.verdict = Verdict::Degenerate;
        use_max = std::abs(c.max_value) >= std::abs(c.min_value);
    } else if (nonpos) {
        c.verdict = Verdict::NonPositive;
        use_max = true;
    } else if (nonneg) {
        c.verdict = Verdict::NonNegative;
        use_max = false;
    } else {
        c.verdict = Verdict::Mixed;
        use_max = c.max_value >= -c.min_value;
    }
    if (use_max) {
        c.extremal_value = c.max_value;
        c.witness_x = c.max_x;
        c.witness_v = c.max_v;
        c.witness_w = c.max_w;
        c.tolerance = tol_max;
    } else {
        c.extremal_value = c.min_value;
        c.witness_x = c.min_x;
        c.witness_v = c.min_v;
        c.witness_w = c.min_w;
        c.tolerance = tol_min;
    }
    c.witness_degenerate = std::abs(c.extremal_value) <= c.tolerance;
    return c;
}

SignCertificate certify_sign(const PotentialHandle& handle, Quantity q, const SampleSpec& region,
                             const SearchSpec& search, Exec exec) {
    std::vector<Vec> pts = generate_samples(region, handle.domain);
    std::vector<PointExtrema> ex(pts.size());
    for_each_index(exec, static_cast<std::ptrdiff_t>(pts.size()), [&](std::ptrdiff_t i) {
        if (q == Quantity::MtwOrth) {
            ex[i] = mtw_point_extrema(handle, pts[i], search);
        } else {
            CurvatureSample s = core_form(jet(handle, pts[i]));
            ex[i] = point_extrema(s, q, search);
        }
    });
    return merge_extrema(to_string(q), pts, ex);
}

std::vector<ScanRow> curvature_scan(const PotentialHandle& handle, const std::vector<Vec>& points,
                                    const SearchSpec& search, Exec exec) {
    std::vector<ScanRow> rows(points.size());
    for_each_index(exec, static_cast<std::ptrdiff_t>(points.size()), [&](std::ptrdiff_t i) {
        CurvatureSample s = core_form(jet(handle, points[i]));
        ScanRow& r = rows[i];
        r.x = points[i];
        r.S = scalar(s);
        r.O = s.E.dim() > 1 ? oab_trace(s) : 0.0;
        r.hmin_pol = point_extrema(s, Quantity::HscPol, search).min_value;
        PointExtrema a = point_extrema(s, Quantity::Abc, search);
        r.abc_min = a.min_value;
        r.witness_v = a.min_v;
        r.witness_w = a.min_w;
    });
    return rows;
}

void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows) {
    if (rows.empty()) return;
    const int n = static_cast<int>(rows.front().x.size());
    for (int i = 1; i <= n; ++i) out << "x" << i << ",";
    out << "S,O,Hmin_pol,ABC_min";
    for (int i = 1; i <= n; ++i) out << ",v" << i;
    for (int i = 1; i <= n; ++i) out << ",w" << i;
    out << "\n";
    for (const auto& r : rows) {
        for (int i = 0; i < n; ++i) out << format_double(r.x[i]) << ",";
        out << format_double(r.S) << "," << format_double(r.O) << "," << format_double(r.hmin_pol) << ","
            << format_double(r.abc_min);
        for (int i = 0; i < n; ++i) out << "," << format_double(r.witness_v[i]);
        for (int i = 0; i < n; ++i) out << "," << format_double(r.witness_w[i]);
        out << "\n";
    }
}

}  // namespace tubeflow
