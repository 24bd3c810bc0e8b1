#pragma once

#include <string>

#include "cra/errors.hpp"

namespace cra {

enum class Protocol { ARA, QA };

/// How the variational coefficients of the nested-commutator expansion are
/// fitted: against the total path derivative dH/dtheta (default), or against
/// the two parameter components (dH/dlambda, dH/ds) with shared coefficients.
enum class VariationalMode { Path, Components };

enum class NormKind { Frobenius, Trace };

/// Parameters of a single annealing run. Energies are in units of e0 and
/// times in units of 1/e0.
struct AnnealParams {
    Protocol protocol = Protocol::ARA;
    int p = 3;          // p-spin exponent, odd, >= 3
    double gamma = 1.0; // transverse-field strength
    double q = 1.0;     // path exponent, lambda = s^q
    double tau = 1.0;   // total annealing time
    double e0 = 1.0;    // energy scale
    int cd_order = 0;   // nested-commutator order K in 0..3; 0 = no CD term
    VariationalMode variational = VariationalMode::Path;

    void validate() const {
        if (p < 3 || p % 2 == 0) throw Error("p must be odd and >= 3");
        if (gamma <= 0.0) throw Error("gamma must be positive");
        if (q <= 0.0) throw Error("path exponent q must be positive");
        if (tau <= 0.0) throw Error("tau must be positive");
        if (e0 <= 0.0) throw Error("e0 must be positive");
        if (cd_order < 0 || cd_order > 3) throw Error("cd_order K must be in 0..3");
    }
};

inline std::string protocol_name(Protocol pr) {
    return pr == Protocol::ARA ? "ARA" : "QA";
}

inline Protocol protocol_from_name(const std::string& name) {
    if (name == "ARA" || name == "ara") return Protocol::ARA;
    if (name == "QA" || name == "qa") return Protocol::QA;
    throw Error("unknown protocol: " + name);
}

}  // namespace cra
