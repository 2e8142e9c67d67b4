#pragma once

#include "tubeflow/tensor.hpp"

#include <iosfwd>
#include <string>

namespace tubeflow {

enum class Verdict { NonPositive, NonNegative, Mixed, Degenerate, Pass, Fail };
std::string to_string(Verdict v);

struct SignCertificate {
    std::string quantity;
    Verdict verdict = Verdict::Degenerate;
    double extremal_value = 0.0;
    bool witness_degenerate = false;  // |extremal_value| <= tolerance
    Vec witness_x, witness_v, witness_w;
    double max_value = 0.0, min_value = 0.0;
    Vec max_x, max_v, max_w, min_x, min_v, min_w;
    double tolerance = 0.0;
    long samples = 0;
};

// Key-value text block, one "key = value" per line.
void write_certificate(std::ostream& out, const SignCertificate& c);
std::string format_vec(const Vec& v);

}  // namespace tubeflow
