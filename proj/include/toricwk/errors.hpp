#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace toricwk {

// Every library failure carries a stable machine-readable code. Input errors
// map to CLI exit code 2, numerical failures to exit code 3.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what, bool input_error)
        : std::runtime_error(code + ": " + what), code_(std::move(code)), input_error_(input_error) {}

    const std::string& code() const noexcept { return code_; }
    bool input_error() const noexcept { return input_error_; }

private:
    std::string code_;
    bool input_error_;
};

#define TORICWK_ERROR(Name, is_input)                                              \
    class Name : public Error {                                                    \
    public:                                                                        \
        explicit Name(const std::string& what) : Error(#Name, what, is_input) {}   \
    };

TORICWK_ERROR(SchemaError, true)
TORICWK_ERROR(InvalidInput, true)
TORICWK_ERROR(NonPrimitiveNormal, true)
TORICWK_ERROR(EmptyInterior, true)
TORICWK_ERROR(NotSimple, true)
TORICWK_ERROR(NotInteriorDirection, true)
TORICWK_ERROR(NotAdmissible, true)
TORICWK_ERROR(RTooSmall, true)
TORICWK_ERROR(PoleOnDomain, false)
TORICWK_ERROR(DivergentIntegral, false)
TORICWK_ERROR(ToleranceNotMet, false)
TORICWK_ERROR(NotConvexHere, false)
TORICWK_ERROR(NotConvexGrid, false)
TORICWK_ERROR(ZeroDenominator, false)
TORICWK_ERROR(NotASolution, false)
TORICWK_ERROR(AffineFutakiNonzero, false)
TORICWK_ERROR(FixedPointDiverged, false)
TORICWK_ERROR(EmptyFamily, false)
TORICWK_ERROR(RegressionMismatch, false)

#undef TORICWK_ERROR

// Raised when a factor expected to be positive on the domain is not; carries
// the offending point.
class FactorNotPositive : public Error {
public:
    FactorNotPositive(const std::string& what, std::vector<double> witness)
        : Error("FactorNotPositive", what, true), witness_(std::move(witness)) {}
    const std::vector<double>& witness() const noexcept { return witness_; }

private:
    std::vector<double> witness_;
};

}  // namespace toricwk
