#pragma once

#include <stdexcept>
#include <string>

namespace tubeflow {

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

#define TUBEFLOW_ERROR(Name)                                                      \
    class Name : public Error {                                                   \
    public:                                                                       \
        explicit Name(const std::string& what) : Error(#Name, what) {}            \
    };

TUBEFLOW_ERROR(OutOfDomain)
TUBEFLOW_ERROR(NotConvexHere)
TUBEFLOW_ERROR(UnknownName)
TUBEFLOW_ERROR(BadParams)
TUBEFLOW_ERROR(SingularHessian)
TUBEFLOW_ERROR(SingularMixedHessian)
TUBEFLOW_ERROR(ZeroVector)
TUBEFLOW_ERROR(BadFrame)
TUBEFLOW_ERROR(BlowUp)
TUBEFLOW_ERROR(SymmetryDrift)
TUBEFLOW_ERROR(NotExtremal)
TUBEFLOW_ERROR(NotPSD)
TUBEFLOW_ERROR(NotNegativeHSC)
TUBEFLOW_ERROR(NotNegativeABC)
TUBEFLOW_ERROR(StabilityFailure)
TUBEFLOW_ERROR(IncompatibleMode)
TUBEFLOW_ERROR(Infeasible)
TUBEFLOW_ERROR(NotDeterministic)
TUBEFLOW_ERROR(ConfigError)
TUBEFLOW_ERROR(ParseError)

#undef TUBEFLOW_ERROR

}  // namespace tubeflow
