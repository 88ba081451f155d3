#ifndef RATEQ_PARSER_HPP
#define RATEQ_PARSER_HPP

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "model.hpp"
#include "rational.hpp"

namespace rateq {

struct ParseError {
    std::size_t line = 0;
    std::size_t col = 0;
    std::string message;

    std::string format(const std::string& filename = "<model>") const {
        return filename + ":" + std::to_string(line) + ":" + std::to_string(col) +
               ": error: " + message;
    }
};

namespace detail {

struct Token {
    enum Kind { IDENT, NUMBER, PUNCT, END } kind = END;
    std::string text;
    std::size_t line = 1;
    std::size_t col = 1;
};

inline const std::set<std::string>& keywords() {
    static const std::set<std::string> kw = {"alphabet", "graph", "rule", "rate", "observable",
                                             "forbid",   "equiv", "output", "init", "start",
                                             "nodes",    "edges", "node",  "edge"};
    return kw;
}

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return tok_; }
    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        skip_space();
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= text_.size()) {
            tok_ = {Token::END, "", line_, col_};
            return;
        }
        char c = text_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                bump();
            tok_ = {Token::IDENT, text_.substr(start, pos_ - start), tok_.line, tok_.col};
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                                           text_[pos_] == '.'))
                bump();
            tok_ = {Token::NUMBER, text_.substr(start, pos_ - start), tok_.line, tok_.col};
            return;
        }
        // Two-character arrows first.
        if (c == '=' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
            bump();
            bump();
            tok_ = {Token::PUNCT, "=>", tok_.line, tok_.col};
            return;
        }
        if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
            bump();
            bump();
            tok_ = {Token::PUNCT, "->", tok_.line, tok_.col};
            return;
        }
        static const std::string singles = "{}():;,=@+-*/";
        if (singles.find(c) != std::string::npos) {
            bump();
            tok_ = {Token::PUNCT, std::string(1, c), tok_.line, tok_.col};
            return;
        }
        throw ParseError{line_, col_, std::string("unexpected character '") + c + "'"};
    }

    void skip_space() {
        for (;;) {
            while (pos_ < text_.size() &&
                   std::isspace(static_cast<unsigned char>(text_[pos_])))
                bump();
            if (pos_ < text_.size() && text_[pos_] == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') bump();
                continue;
            }
            break;
        }
    }

    void bump() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
    Token tok_;
};

class ModelParser {
public:
    explicit ModelParser(const std::string& text) : lex_(text) {}

    Model run() {
        while (lex_.peek().kind != Token::END) statement();
        try {
            model_.validate();
        } catch (const std::invalid_argument& e) {
            throw ParseError{1, 1, e.what()};
        }
        return model_;
    }

private:
    [[noreturn]] void fail(const Token& at, const std::string& msg) const {
        throw ParseError{at.line, at.col, msg};
    }

    Token expect_punct(const std::string& p) {
        Token t = lex_.next();
        if (t.kind != Token::PUNCT || t.text != p)
            fail(t, "expected '" + p + "', found '" + (t.kind == Token::END ? "end of file" : t.text) + "'");
        return t;
    }

    bool try_punct(const std::string& p) {
        if (lex_.peek().kind == Token::PUNCT && lex_.peek().text == p) {
            lex_.next();
            return true;
        }
        return false;
    }

    Token expect_ident(const std::string& what, bool allow_keyword = false) {
        Token t = lex_.next();
        if (t.kind != Token::IDENT) fail(t, "expected " + what);
        if (!allow_keyword && keywords().count(t.text))
            fail(t, "'" + t.text + "' is a reserved word and cannot name " + what);
        return t;
    }

    bool at_keyword() const {
        return lex_.peek().kind == Token::IDENT && keywords().count(lex_.peek().text);
    }

    void statement() {
        Token t = lex_.peek();
        if (t.kind != Token::IDENT) fail(t, "expected a declaration");
        const std::string& k = t.text;
        if (k == "alphabet") return alphabet();
        if (k == "graph") return graph_def();
        if (k == "rule") return rule_def();
        if (k == "rate") return rate_def();
        if (k == "observable") return observable_def();
        if (k == "forbid") return forbid_def();
        if (k == "equiv") return equiv_def();
        if (k == "output") return output_def();
        if (k == "init") return init_def();
        if (k == "start") return start_def();
        fail(t, "unknown declaration '" + k + "'");
    }

    void alphabet() {
        lex_.next();
        Token sort = lex_.next();
        if (sort.kind != Token::IDENT || (sort.text != "node" && sort.text != "edge"))
            fail(sort, "expected 'node' or 'edge' after 'alphabet'");
        expect_punct("{");
        std::vector<Label>& dst = sort.text == "node" ? model_.node_alphabet : model_.edge_alphabet;
        if (!dst.empty()) fail(sort, "duplicate " + sort.text + " alphabet");
        for (;;) {
            Token l = expect_ident("a label");
            if (std::find(dst.begin(), dst.end(), l.text) != dst.end())
                fail(l, "duplicate label '" + l.text + "'");
            dst.push_back(l.text);
            if (try_punct("}")) break;
            expect_punct(",");
        }
    }

    Label check_label(const Token& at, const std::string& text, bool node_sort) {
        const auto& alpha = node_sort ? model_.node_alphabet : model_.edge_alphabet;
        if (text.empty()) {
            if (!alpha.empty())
                fail(at, std::string(node_sort ? "node" : "edge") +
                             " must be labeled: the model declares an alphabet");
            return "";
        }
        if (alpha.empty())
            fail(at, "label '" + text + "' used without an alphabet declaration");
        if (std::find(alpha.begin(), alpha.end(), text) == alpha.end())
            fail(at, "label '" + text + "' is not in the declared alphabet");
        return text;
    }

    void graph_def() {
        lex_.next();
        Token name = expect_ident("a graph name");
        if (model_.find_graph(name.text)) fail(name, "duplicate graph '" + name.text + "'");
        expect_punct("{");

        NamedGraph ng;
        ng.name = name.text;
        std::vector<Node> nodes;
        std::vector<Edge> edges;
        std::map<std::string, Id> node_ids;
        std::map<std::string, Id> edge_ids;

        if (lex_.peek().kind == Token::IDENT && lex_.peek().text == "nodes") {
            lex_.next();
            expect_punct(":");
            for (;;) {
                Token n = expect_ident("a node name");
                if (node_ids.count(n.text)) fail(n, "duplicate node '" + n.text + "'");
                Label label;
                if (try_punct(":")) label = expect_ident("a node label", true).text;
                label = check_label(n, label, true);
                Id id = nodes.size();
                node_ids[n.text] = id;
                nodes.push_back({id, label});
                ng.node_names.push_back(n.text);
                if (!try_punct(",")) break;
            }
            try_punct(";");
        }
        if (lex_.peek().kind == Token::IDENT && lex_.peek().text == "edges") {
            lex_.next();
            expect_punct(":");
            for (;;) {
                Token first = expect_ident("an edge or node name");
                std::string ename;
                Token srctok = first;
                if (try_punct(":")) {
                    ename = first.text;
                    srctok = expect_ident("a source node");
                }
                auto src = node_ids.find(srctok.text);
                if (src == node_ids.end()) fail(srctok, "unknown node '" + srctok.text + "'");
                Label label;
                Token labtok = srctok;
                if (try_punct("->")) {
                    // unlabeled
                } else if (try_punct("-")) {
                    labtok = expect_ident("an edge label", true);
                    label = labtok.text;
                    expect_punct("->");
                } else {
                    fail(lex_.peek(), "expected '->' or '-label->'");
                }
                label = check_label(labtok, label, false);
                Token tgttok = expect_ident("a target node");
                auto tgt = node_ids.find(tgttok.text);
                if (tgt == node_ids.end()) fail(tgttok, "unknown node '" + tgttok.text + "'");
                Id id = edges.size();
                if (ename.empty()) ename = "e" + std::to_string(id);
                if (edge_ids.count(ename)) fail(first, "duplicate edge '" + ename + "'");
                edge_ids[ename] = id;
                edges.push_back({id, src->second, tgt->second, label});
                ng.edge_names.push_back(ename);
                if (!try_punct(",")) break;
            }
            try_punct(";");
        }
        expect_punct("}");
        ng.graph = Graph(std::move(nodes), std::move(edges));
        model_.graphs.push_back(std::move(ng));
    }

    const NamedGraph& graph_ref(const Token& t) {
        const NamedGraph* g = model_.find_graph(t.text);
        if (!g) fail(t, "unknown graph '" + t.text + "'");
        return *g;
    }

    void rule_def() {
        Token kw = lex_.next();
        Token name = expect_ident("a rule name");
        for (auto& r : model_.rules)
            if (r.name == name.text) fail(name, "duplicate rule '" + name.text + "'");
        expect_punct(":");
        Token lhs_tok = expect_ident("the left graph");
        const NamedGraph& lhs = graph_ref(lhs_tok);
        expect_punct("=>");
        Token rhs_tok = expect_ident("the right graph");
        const NamedGraph& rhs = graph_ref(rhs_tok);
        expect_punct("@");
        Rational rate = expression();
        expect_punct("{");

        std::vector<std::pair<Id, Id>> node_corr, edge_corr;
        if (!try_punct("}")) {
            for (;;) {
                Token l = expect_ident("a left item name");
                expect_punct("=");
                Token r = expect_ident("a right item name");
                auto ln = find_name(lhs.node_names, l.text);
                auto rn = find_name(rhs.node_names, r.text);
                auto le = find_name(lhs.edge_names, l.text);
                auto re = find_name(rhs.edge_names, r.text);
                if (ln >= 0 && rn >= 0) {
                    node_corr.push_back({Id(ln), Id(rn)});
                } else if (le >= 0 && re >= 0) {
                    edge_corr.push_back({Id(le), Id(re)});
                } else if (ln >= 0 || rn >= 0 || le >= 0 || re >= 0) {
                    fail(l, "correspondence '" + l.text + " = " + r.text +
                                "' must pair two nodes or two edges");
                } else {
                    fail(l, "unknown item '" + l.text + "' in rule correspondence");
                }
                if (try_punct("}")) break;
                expect_punct(",");
            }
        }
        try {
            Rule rule = make_rule(lhs.graph, rhs.graph, node_corr, edge_corr,
                                  std::uint32_t(model_.rules.size()), name.text);
            model_.rules.push_back({name.text, std::move(rule), rate});
        } catch (const std::invalid_argument& e) {
            fail(kw, std::string("rule '") + name.text + "': " + e.what());
        }
    }

    static int find_name(const std::vector<std::string>& names, const std::string& s) {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == s) return int(i);
        return -1;
    }

    void rate_def() {
        lex_.next();
        Token name = expect_ident("a rate name");
        if (rates_.count(name.text)) fail(name, "duplicate rate '" + name.text + "'");
        expect_punct("=");
        rates_[name.text] = expression();
    }

    void observable_def() {
        lex_.next();
        Token name = expect_ident("an observable name");
        expect_punct("=");
        Token g = expect_ident("a graph name");
        graph_ref(g);
        model_.observables.push_back({name.text, g.text});
    }

    void forbid_def() {
        lex_.next();
        Token g = expect_ident("a graph name");
        graph_ref(g);
        model_.forbids.push_back(g.text);
    }

    void equiv_def() {
        lex_.next();
        Token a = expect_ident("a graph name");
        graph_ref(a);
        expect_punct("=");
        Token b = expect_ident("a graph name");
        graph_ref(b);
        model_.equivalences.push_back({a.text, b.text});
    }

    void output_def() {
        lex_.next();
        Token name = expect_ident("an output name");
        expect_punct("=");
        Output out;
        out.name = name.text;
        bool negate = try_punct("-");
        for (;;) {
            out.terms.push_back(output_term(negate));
            if (try_punct("+")) {
                negate = false;
            } else if (try_punct("-")) {
                negate = true;
            } else {
                break;
            }
        }
        model_.outputs.push_back(std::move(out));
    }

    /// One summand of an output: [coefficient *] observable. The observable
    /// is the final identifier of the summand; everything before it is a
    /// multiplicative chain of numbers, rate names, and parentheses.
    OutputTerm output_term(bool negate) {
        Rational coeff(1);
        const Token& t0 = lex_.peek();
        bool starts_with_coeff = t0.kind == Token::NUMBER ||
                                 (t0.kind == Token::PUNCT && t0.text == "(") ||
                                 (t0.kind == Token::IDENT && rates_.count(t0.text));
        std::optional<Token> obs;
        if (starts_with_coeff) {
            coeff = factor();
            while (!obs) {
                if (try_punct("/")) {
                    Token at = lex_.peek();
                    Rational d = factor();
                    if (d.is_zero()) fail(at, "division by zero");
                    coeff = coeff / d;
                } else if (try_punct("*")) {
                    const Token& nxt = lex_.peek();
                    if (nxt.kind == Token::IDENT && !rates_.count(nxt.text))
                        obs = expect_ident("an observable name");
                    else
                        coeff *= factor();
                } else {
                    fail(lex_.peek(), "expected '* observable' in output term");
                }
            }
        } else {
            obs = expect_ident("an observable name");
        }
        bool known = false;
        for (auto& [o, g] : model_.observables) known = known || o == obs->text;
        if (!known) fail(*obs, "unknown observable '" + obs->text + "'");
        if (negate) coeff = -coeff;
        return OutputTerm{coeff, obs->text};
    }

    void init_def() {
        lex_.next();
        Token name = expect_ident("an observable name");
        expect_punct("=");
        model_.inits.push_back({name.text, expression()});
    }

    void start_def() {
        lex_.next();
        Token g = expect_ident("a graph name");
        graph_ref(g);
        if (model_.start) fail(g, "duplicate start declaration");
        model_.start = g.text;
    }

    // Arithmetic over numbers and previously declared rate names.
    Rational expression() {
        Rational v = term();
        for (;;) {
            if (try_punct("+")) v += term();
            else if (lex_.peek().kind == Token::PUNCT && lex_.peek().text == "-") {
                lex_.next();
                v -= term();
            } else {
                return v;
            }
        }
    }

    Rational term() {
        Rational v = factor();
        for (;;) {
            if (try_punct("*")) v *= factor();
            else if (try_punct("/")) {
                Token at = lex_.peek();
                Rational d = factor();
                if (d.is_zero()) fail(at, "division by zero");
                v = v / d;
            } else {
                return v;
            }
        }
    }

    Rational factor() {
        Token t = lex_.next();
        if (t.kind == Token::NUMBER) {
            try {
                return Rational::parse(t.text);
            } catch (const std::exception&) {
                fail(t, "malformed number '" + t.text + "'");
            }
        }
        if (t.kind == Token::IDENT) {
            auto it = rates_.find(t.text);
            if (it == rates_.end()) fail(t, "unknown rate '" + t.text + "'");
            return it->second;
        }
        if (t.kind == Token::PUNCT && t.text == "(") {
            Rational v = expression();
            expect_punct(")");
            return v;
        }
        if (t.kind == Token::PUNCT && t.text == "-") return -factor();
        fail(t, "expected a number, rate name, or parenthesized expression");
    }

    Lexer lex_;
    Model model_;
    std::map<std::string, Rational> rates_;
};

} // namespace detail

inline Model parse_model(const std::string& text) {
    return detail::ModelParser(text).run();
}

inline Model parse_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError{0, 0, "cannot open '" + path + "'"};
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

/// Renders a model back to the text form; parse(print(m)) is structurally
/// equal to m. Rates and coefficients print as exact rationals.
inline std::string print_model(const Model& m) {
    std::ostringstream out;
    auto alphabet = [&](const char* sort, const std::vector<Label>& labels) {
        if (labels.empty()) return;
        out << "alphabet " << sort << " { ";
        for (std::size_t i = 0; i < labels.size(); ++i) out << (i ? ", " : "") << labels[i];
        out << " }\n";
    };
    alphabet("node", m.node_alphabet);
    alphabet("edge", m.edge_alphabet);
    out << "\n";
    for (const NamedGraph& g : m.graphs) {
        out << "graph " << g.name << " {";
        if (!g.graph.nodes().empty()) {
            out << "\n  nodes: ";
            for (std::size_t i = 0; i < g.graph.nodes().size(); ++i) {
                const Node& n = g.graph.nodes()[i];
                out << (i ? ", " : "") << g.node_names[i];
                if (!n.label.empty()) out << ":" << n.label;
            }
        }
        if (!g.graph.edges().empty()) {
            out << "\n  edges: ";
            for (std::size_t i = 0; i < g.graph.edges().size(); ++i) {
                const Edge& e = g.graph.edges()[i];
                out << (i ? ", " : "") << g.edge_names[i] << ": " << g.node_names[e.src];
                if (e.label.empty()) out << " -> ";
                else out << " -" << e.label << "-> ";
                out << g.node_names[e.tgt];
            }
        }
        out << (g.graph.empty() ? "}" : "\n}") << "\n";
    }
    out << "\n";
    for (const ModelRule& r : m.rules) {
        const NamedGraph* lhs = nullptr;
        const NamedGraph* rhs = nullptr;
        for (auto& g : m.graphs) {
            if (g.graph == r.rule.lhs() && !lhs) lhs = &g;
            if (g.graph == r.rule.rhs() && !rhs) rhs = &g;
        }
        if (!lhs || !rhs) throw std::logic_error("print_model: rule graphs must be declared graphs");
        out << "rule " << r.name << ": " << lhs->name << " => " << rhs->name << " @ "
            << r.rate.str() << " {";
        bool first = true;
        for (auto& [l, rr] : r.rule.node_pmap()) {
            out << (first ? " " : ", ") << lhs->node_names[l] << " = " << rhs->node_names[rr];
            first = false;
        }
        for (auto& [l, rr] : r.rule.edge_pmap()) {
            out << (first ? " " : ", ") << lhs->edge_names[l] << " = " << rhs->edge_names[rr];
            first = false;
        }
        out << (first ? "}" : " }") << "\n";
    }
    out << "\n";
    for (auto& [name, gname] : m.observables) out << "observable " << name << " = " << gname << "\n";
    for (auto& f : m.forbids) out << "forbid " << f << "\n";
    for (auto& [a, b] : m.equivalences) out << "equiv " << a << " = " << b << "\n";
    for (const Output& o : m.outputs) {
        out << "output " << o.name << " = ";
        for (std::size_t i = 0; i < o.terms.size(); ++i) {
            const Rational& c = o.terms[i].coeff;
            if (i) out << (c < Rational(0) ? " - " : " + ");
            else if (c < Rational(0)) out << "- ";
            Rational mag = c < Rational(0) ? -c : c;
            out << mag.str() << " * " << o.terms[i].observable;
        }
        out << "\n";
    }
    for (auto& [name, v] : m.inits) out << "init " << name << " = " << v.str() << "\n";
    if (m.start) out << "start " << *m.start << "\n";
    return out.str();
}

} // namespace rateq

#endif
