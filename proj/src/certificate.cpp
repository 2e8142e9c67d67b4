#include "tubeflow/certificate.hpp"

#include <ostream>

namespace tubeflow {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::NonPositive: return "NONPOSITIVE";
        case Verdict::NonNegative: return "NONNEGATIVE";
        case Verdict::Mixed: return "MIXED";
        case Verdict::Degenerate: return "DEGENERATE";
        case Verdict::Pass: return "PASS";
        case Verdict::Fail: return "FAIL";
    }
    return "UNKNOWN";
}

std::string format_vec(const Vec& v) {
    std::string s;
    for (int i = 0; i < v.size(); ++i) {
        if (i) s += " ";
        s += format_double(v[i]);
    }
    return s;
}

void write_certificate(std::ostream& out, const SignCertificate& c) {
    out << "quantity = " << c.quantity << "\n";
    out << "verdict = " << to_string(c.verdict) << "\n";
    out << "extremal_value = " << format_double(c.extremal_value) << "\n";
    out << "witness_degenerate = " << (c.witness_degenerate ? 1 : 0) << "\n";
    out << "witness_x = " << format_vec(c.witness_x) << "\n";
    out << "witness_v = " << format_vec(c.witness_v) << "\n";
    out << "witness_w = " << format_vec(c.witness_w) << "\n";
    out << "max_value = " << format_double(c.max_value) << "\n";
    out << "max_x = " << format_vec(c.max_x) << "\n";
    out << "min_value = " << format_double(c.min_value) << "\n";
    out << "min_x = " << format_vec(c.min_x) << "\n";
    out << "tolerance = " << format_double(c.tolerance) << "\n";
    out << "samples = " << c.samples << "\n";
}

}  // namespace tubeflow
