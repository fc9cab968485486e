#pragma once

#include <map>
#include <string>
#include <vector>

#include "qgrav/chart.hpp"
#include "qgrav/expr.hpp"

namespace qgrav {

// A wave function: psi as a complex-valued expression over a chart, plus
// numeric parameter bindings (C1, a0, omega0, ...).
struct WaveFunction {
    Expr psi;
    Chart chart = Chart::polar();
    std::map<std::string, double> params;

    // validates free_symbols(psi) against coordinates + parameters
    static WaveFunction make(Expr psi, Chart chart, std::map<std::string, double> params);
};

struct BuiltinInfo {
    std::string name;
    std::string psi_text;
    std::map<std::string, double> params;
};

// hydrogen-1s, hydrogenlike-2p, plane-wave, gaussian
const std::vector<BuiltinInfo>& builtin_wavefunctions();

// Throws SpecError listing the available names when unknown.
WaveFunction load_builtin(const std::string& name);

// Wave-function file format: optional "param NAME = NUMBER" lines, one
// "psi = EXPRESSION" line, '#' comments. Throws IoError / SyntaxError with
// line information.
WaveFunction load_wavefunction_file(const std::string& path);

}  // namespace qgrav
