#ifndef RATEQ_LATEX_HPP
#define RATEQ_LATEX_HPP

#include <sstream>
#include <string>

#include "json_io.hpp"

namespace rateq {

namespace detail {

inline std::string latex_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '_': out += "\\_"; break;
            case '{': out += "\\{"; break;
            case '}': out += "\\}"; break;
            case '#': out += "\\#"; break;
            case '>': out += "{>}"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string graph_inline(const Graph& g) {
    std::ostringstream os;
    os << g;
    return latex_escape(os.str());
}

inline std::string rational_latex(const Rational& r) {
    if (r.den() == 1) return std::to_string(r.num() < 0 ? -r.num() : r.num());
    return "\\tfrac{" + std::to_string(r.num() < 0 ? -r.num() : r.num()) + "}{" +
           std::to_string(r.den()) + "}";
}

} // namespace detail

/// Renders the equation system as an align* block, one line per observable,
/// followed by a legend mapping the short observable names to their graphs.
inline std::string system_to_latex(const SystemFile& f) {
    std::ostringstream out;
    out << "\\begin{align*}\n";
    for (auto& eq : f.system.equations) {
        out << "\\frac{d}{dt}\\langle \\mathrm{"
            << detail::latex_escape(f.system.display_name(eq.lhs.key)) << "}\\rangle &= ";
        if (eq.rhs.empty()) out << "0";
        bool first = true;
        for (auto& [key, term] : eq.rhs.terms()) {
            bool neg = term.coeff < Rational(0);
            if (first) {
                if (neg) out << "-";
            } else {
                out << (neg ? " - " : " + ");
            }
            first = false;
            Rational mag = neg ? -term.coeff : term.coeff;
            if (!(mag == Rational(1)) || key == empty_observable_key())
                out << detail::rational_latex(mag) << "\\,";
            if (key != empty_observable_key())
                out << "\\langle \\mathrm{" << detail::latex_escape(f.system.display_name(key))
                    << "}\\rangle";
        }
        out << " \\\\\n";
    }
    out << "\\end{align*}\n\n";
    out << "\\begin{tabular}{ll}\n";
    for (auto& eq : f.system.equations)
        out << "$\\mathrm{" << detail::latex_escape(f.system.display_name(eq.lhs.key))
            << "}$ & \\texttt{" << detail::graph_inline(eq.lhs.graph) << "} \\\\\n";
    out << "\\end{tabular}\n";
    return out.str();
}

} // namespace rateq

#endif
