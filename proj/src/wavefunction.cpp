#include "qgrav/wavefunction.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qgrav/error.hpp"
#include "qgrav/parser.hpp"

namespace qgrav {

WaveFunction WaveFunction::make(Expr psi, Chart chart, std::map<std::string, double> params) {
    WaveFunction w{std::move(psi), std::move(chart), std::move(params)};
    for (const auto& s : free_symbols(w.psi)) {
        bool known = w.params.count(s) > 0;
        for (const auto& c : w.chart.coords()) known = known || c == s;
        if (w.chart.light_speed().is_symbol(s)) known = true;
        if (!known)
            throw SpecError("wave function references symbol '" + s +
                            "' that is neither a coordinate nor a parameter");
    }
    return w;
}

const std::vector<BuiltinInfo>& builtin_wavefunctions() {
    static const std::vector<BuiltinInfo> table = {
        {"hydrogen-1s", "C*exp(-r/a0)*exp(-i*omega0*t)",
         {{"C", 1.0}, {"a0", 1.0}, {"omega0", 1.0}}},
        {"hydrogenlike-2p", "C1*r*sin(theta)*cos(phi)*exp(-r/(2*a0))*exp(-i*omega0*t)",
         {{"C1", 1.0}, {"a0", 1.0}, {"omega0", 1.0}}},
        {"plane-wave", "C*exp(i*(k0*r - omega0*t))",
         {{"C", 1.0}, {"k0", 1.0}, {"omega0", 1.0}}},
        {"gaussian", "C*exp(-r^2/(2*sigma^2))*exp(-i*omega0*t)",
         {{"C", 1.0}, {"sigma", 1.0}, {"omega0", 1.0}}},
    };
    return table;
}

WaveFunction load_builtin(const std::string& name) {
    for (const auto& b : builtin_wavefunctions()) {
        if (b.name == name)
            return WaveFunction::make(parse(b.psi_text), Chart::polar(), b.params);
    }
    std::string msg = "unknown builtin wave function '" + name + "'; available:";
    for (const auto& b : builtin_wavefunctions()) msg += " " + b.name;
    throw SpecError(msg);
}

WaveFunction load_wavefunction_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open wave-function file: " + path);
    std::map<std::string, double> params;
    Expr psi;
    bool have_psi = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        if (first == "param") {
            std::string name, eq, value;
            if (!(ls >> name >> eq >> value) || eq != "=")
                throw IoError(where + ": expected 'param NAME = NUMBER'");
            char* end = nullptr;
            const double v = std::strtod(value.c_str(), &end);
            if (end == value.c_str() || *end != '\0')
                throw IoError(where + ": invalid number '" + value + "'");
            if (!params.emplace(name, v).second)
                throw IoError(where + ": parameter '" + name + "' defined twice");
        } else if (first == "psi") {
            std::string eq;
            if (!(ls >> eq) || eq != "=") throw IoError(where + ": expected 'psi = EXPRESSION'");
            std::string rest;
            std::getline(ls, rest);
            if (have_psi) throw IoError(where + ": psi defined twice");
            try {
                psi = parse(rest);
            } catch (const SyntaxError& e) {
                throw IoError(where + ": " + e.what());
            }
            have_psi = true;
        } else {
            throw IoError(where + ": expected 'param' or 'psi', got '" + first + "'");
        }
    }
    if (!have_psi) throw IoError(path + ": no 'psi = EXPRESSION' line");
    return WaveFunction::make(psi, Chart::polar(), std::move(params));
}

}  // namespace qgrav
