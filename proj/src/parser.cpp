#include "ssmap/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ssmap {

ParseError::ParseError(Kind kind, std::size_t line, std::size_t column, const std::string& message)
    : Error("line " + std::to_string(line) + ":" + std::to_string(column) + ": " + message), kind_(kind),
      line_(line), column_(column), message_(message)
{
}

std::string format_real(double value)
{
    if (value == 0.0) {
        return "0";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

namespace {

// ---------------------------------------------------------------------------
// Lexing

enum class Tok { ident, number, symbol, end };

struct Token {
    Tok type = Tok::end;
    std::string text;
    double number = 0.0;
    bool integer = false;
    std::size_t column = 0;
};

std::vector<Token> lex_line(std::string_view line, std::size_t line_no)
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (c == '#') {
            break;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Token tok;
        tok.column = i + 1;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < line.size() && (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_')) {
                ++j;
            }
            tok.type = Tok::ident;
            tok.text = std::string(line.substr(i, j - i));
            i = j;
        }
        else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t j = i;
            bool integer = true;
            while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) {
                ++j;
            }
            if (j < line.size() && line[j] == '.') {
                integer = false;
                ++j;
                while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) {
                    ++j;
                }
            }
            if (j < line.size() && (line[j] == 'e' || line[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < line.size() && (line[k] == '+' || line[k] == '-')) {
                    ++k;
                }
                if (k < line.size() && std::isdigit(static_cast<unsigned char>(line[k]))) {
                    integer = false;
                    j = k;
                    while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) {
                        ++j;
                    }
                }
            }
            tok.type = Tok::number;
            tok.text = std::string(line.substr(i, j - i));
            tok.integer = integer;
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
            if (ec != std::errc() || ptr != tok.text.data() + tok.text.size() || tok.text == ".") {
                throw ParseError(ParseError::Kind::syntax, line_no, tok.column, "malformed number '" + tok.text + "'");
            }
            tok.number = value;
            i = j;
        }
        else if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
            tok.type = Tok::symbol;
            tok.text = "->";
            i += 2;
        }
        else if (c == '=' || c == '+' || c == '*' || c == '(' || c == ')' || c == ',') {
            tok.type = Tok::symbol;
            tok.text = std::string(1, c);
            ++i;
        }
        else {
            throw ParseError(ParseError::Kind::syntax, line_no, i + 1,
                             std::string("unexpected character '") + c + "'");
        }
        out.push_back(std::move(tok));
    }
    Token end;
    end.type = Tok::end;
    end.column = line.size() + 1;
    out.push_back(end);
    return out;
}

class Cursor {
public:
    Cursor(std::vector<Token> tokens, std::size_t line) : tokens_(std::move(tokens)), line_(line) {}

    const Token& peek() const { return tokens_[pos_]; }
    bool at_end() const { return peek().type == Tok::end; }
    std::size_t line() const { return line_; }

    bool accept_symbol(std::string_view s)
    {
        if (peek().type == Tok::symbol && peek().text == s) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect_symbol(std::string_view s)
    {
        if (!accept_symbol(s)) {
            fail("'" + std::string(s) + "'");
        }
    }

    bool accept_keyword(std::string_view s)
    {
        if (peek().type == Tok::ident && peek().text == s) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect_keyword(std::string_view s)
    {
        if (!accept_keyword(s)) {
            fail("'" + std::string(s) + "'");
        }
    }

    Token expect_ident(std::string_view what = "identifier")
    {
        if (peek().type != Tok::ident) {
            fail(std::string(what));
        }
        return tokens_[pos_++];
    }

    Token expect_number(std::string_view what = "number")
    {
        if (peek().type != Tok::number) {
            fail(std::string(what));
        }
        return tokens_[pos_++];
    }

    Token expect_integer(std::string_view what = "integer")
    {
        if (peek().type != Tok::number || !peek().integer) {
            fail(std::string(what));
        }
        return tokens_[pos_++];
    }

    void expect_end()
    {
        if (!at_end()) {
            fail("end of line");
        }
    }

    [[noreturn]] void fail(const std::string& expected) const
    {
        const Token& t = peek();
        std::string found = t.type == Tok::end ? "end of line" : "'" + t.text + "'";
        throw ParseError(ParseError::Kind::syntax, line_, t.column, "expected " + expected + ", found " + found);
    }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::size_t line_;
};

// ---------------------------------------------------------------------------
// Raw stanzas (syntax only)

struct Located {
    std::size_t line = 0;
    std::size_t column = 0;
};

struct RawVar : Located {
    std::string name;
    long levels = 0;
    std::vector<double> thresholds;
    bool has_thresholds = false;
};

struct RawDecay : Located {
    std::string var;
    double value = 1.0;
};

struct RawExponent : Located {
    std::string name;
    std::optional<double> value;
};

struct RawFactor : Located {
    Orientation orientation = Orientation::activating;
    std::string var;
    double threshold = 0.0;
    std::string slot;
};

struct RawProduct : Located {
    double coefficient = 0.0;
    std::vector<RawFactor> factors;
};

struct RawEq : Located {
    std::string var;
    std::vector<RawProduct> products;
};

struct RawRow : Located {
    std::vector<long> inputs;
    std::vector<long> outputs;
};

struct RawTable : Located {
    std::vector<RawRow> rows;
};

struct RawDocument {
    std::optional<std::string> name;
    std::vector<RawVar> vars;
    std::vector<RawDecay> decays;
    std::vector<RawExponent> exponents;
    std::vector<RawEq> eqs;
    std::optional<RawTable> table;
    std::size_t stanza_count = 0;
};

std::vector<std::string_view> split_lines(std::string_view text)
{
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        std::size_t stop = nl == std::string_view::npos ? text.size() : nl;
        std::string_view line = text.substr(start, stop - start);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        lines.push_back(line);
        if (nl == std::string_view::npos) {
            break;
        }
        start = nl + 1;
    }
    return lines;
}

bool is_stanza_keyword(const Token& t)
{
    static const std::set<std::string> keywords{"system", "var", "decay", "exponent", "eq", "table"};
    return t.type == Tok::ident && keywords.count(t.text) > 0;
}

RawFactor parse_factor(Cursor& cur)
{
    RawFactor f;
    f.line = cur.line();
    f.column = cur.peek().column;
    if (cur.accept_keyword("act")) {
        f.orientation = Orientation::activating;
    }
    else if (cur.accept_keyword("rep")) {
        f.orientation = Orientation::repressing;
    }
    else {
        cur.fail("'act' or 'rep'");
    }
    cur.expect_symbol("(");
    f.var = cur.expect_ident("variable name").text;
    cur.expect_symbol(",");
    f.threshold = cur.expect_number("threshold").number;
    cur.expect_symbol(",");
    f.slot = cur.expect_ident("exponent name").text;
    cur.expect_symbol(")");
    return f;
}

RawProduct parse_product(Cursor& cur)
{
    RawProduct p;
    p.line = cur.line();
    p.column = cur.peek().column;
    p.coefficient = cur.expect_number("coefficient").number;
    while (cur.accept_symbol("*")) {
        p.factors.push_back(parse_factor(cur));
    }
    return p;
}

RawRow parse_row(Cursor& cur, std::size_t line)
{
    RawRow row;
    row.line = line;
    row.column = cur.peek().column;
    while (cur.peek().type == Tok::number) {
        row.inputs.push_back(std::lround(cur.expect_integer("integer level").number));
    }
    if (row.inputs.empty()) {
        cur.fail("integer level");
    }
    cur.expect_symbol("->");
    while (cur.peek().type == Tok::number) {
        row.outputs.push_back(std::lround(cur.expect_integer("integer level").number));
    }
    if (row.outputs.empty()) {
        cur.fail("integer level");
    }
    cur.expect_end();
    return row;
}

RawDocument parse_raw(std::string_view text)
{
    RawDocument doc;
    const auto lines = split_lines(text);
    bool in_table = false;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        Cursor cur(lex_line(lines[li], line_no), line_no);
        if (cur.at_end()) {
            continue;
        }
        if (in_table && !is_stanza_keyword(cur.peek())) {
            doc.table->rows.push_back(parse_row(cur, line_no));
            continue;
        }
        in_table = false;
        const Token head = cur.peek();
        if (head.type != Tok::ident) {
            cur.fail("stanza keyword (system, var, decay, exponent, eq, table)");
        }
        ++doc.stanza_count;
        if (cur.accept_keyword("system")) {
            if (doc.name || doc.stanza_count != 1) {
                throw ParseError(ParseError::Kind::syntax, line_no, head.column,
                                 "'system' header must be the first stanza and appear once");
            }
            doc.name = cur.expect_ident("system name").text;
            --doc.stanza_count;
            cur.expect_end();
        }
        else if (cur.accept_keyword("var")) {
            RawVar v;
            v.line = line_no;
            v.column = head.column;
            v.name = cur.expect_ident("variable name").text;
            cur.expect_keyword("levels");
            v.levels = std::lround(cur.expect_integer("level count").number);
            if (cur.accept_keyword("thresholds")) {
                v.has_thresholds = true;
                v.thresholds.push_back(cur.expect_number("threshold").number);
                while (cur.peek().type == Tok::number) {
                    v.thresholds.push_back(cur.expect_number().number);
                }
            }
            cur.expect_end();
            doc.vars.push_back(std::move(v));
        }
        else if (cur.accept_keyword("decay")) {
            RawDecay d;
            d.line = line_no;
            d.column = head.column;
            d.var = cur.expect_ident("variable name").text;
            d.value = cur.expect_number("decay rate").number;
            cur.expect_end();
            doc.decays.push_back(std::move(d));
        }
        else if (cur.accept_keyword("exponent")) {
            RawExponent e;
            e.line = line_no;
            e.column = head.column;
            e.name = cur.expect_ident("exponent name").text;
            if (cur.accept_symbol("=")) {
                e.value = cur.expect_number("exponent value").number;
            }
            cur.expect_end();
            doc.exponents.push_back(std::move(e));
        }
        else if (cur.accept_keyword("eq")) {
            RawEq eq;
            eq.line = line_no;
            eq.column = head.column;
            eq.var = cur.expect_ident("variable name").text;
            cur.expect_symbol("=");
            eq.products.push_back(parse_product(cur));
            while (cur.accept_symbol("+")) {
                eq.products.push_back(parse_product(cur));
            }
            cur.expect_end();
            doc.eqs.push_back(std::move(eq));
        }
        else if (cur.accept_keyword("table")) {
            cur.expect_end();
            if (doc.table) {
                throw ParseError(ParseError::Kind::semantic, line_no, head.column, "duplicate table");
            }
            doc.table = RawTable{};
            doc.table->line = line_no;
            doc.table->column = head.column;
            in_table = true;
        }
        else {
            cur.fail("stanza keyword (system, var, decay, exponent, eq, table)");
        }
    }
    if (doc.stanza_count == 0) {
        throw ParseError(ParseError::Kind::syntax, std::max<std::size_t>(lines.size(), 1), 1, "no stanzas");
    }
    return doc;
}

// ---------------------------------------------------------------------------
// Semantic resolution

[[noreturn]] void semantic(const Located& at, const std::string& message)
{
    throw ParseError(ParseError::Kind::semantic, at.line, at.column, message);
}

std::vector<double> distinct_thresholds(const HillSystem& sys, std::size_t var)
{
    std::vector<double> k;
    for (const auto& expr : sys.expressions()) {
        for (const auto& term : expr.terms) {
            for (const auto& f : term.factors) {
                if (f.var == var) {
                    k.push_back(f.threshold);
                }
            }
        }
    }
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end(), [](double a, double b) { return std::abs(a - b) <= kBoundaryTol; }),
            k.end());
    return k;
}

ModelDocument resolve(const RawDocument& raw, const ParseOptions& options)
{
    ModelDocument doc;
    doc.name = raw.name.value_or("");
    doc.default_exponent = options.default_exponent;

    if (raw.vars.empty()) {
        semantic(raw.eqs.empty() ? Located{1, 1} : static_cast<const Located&>(raw.eqs.front()),
                 "no variables declared");
    }
    std::map<std::string, std::size_t> var_index;
    std::vector<int> max_levels;
    for (const auto& v : raw.vars) {
        if (!var_index.emplace(v.name, var_index.size()).second) {
            semantic(v, "duplicate variable '" + v.name + "'");
        }
        if (v.levels < 2) {
            semantic(v, "variable '" + v.name + "' needs at least 2 levels");
        }
        if (v.has_thresholds && static_cast<long>(v.thresholds.size()) != v.levels - 1) {
            semantic(v, "variable '" + v.name + "' has " + std::to_string(v.levels) + " levels and requires " +
                            std::to_string(v.levels - 1) + " thresholds, found " +
                            std::to_string(v.thresholds.size()));
        }
        for (std::size_t t = 0; t < v.thresholds.size(); ++t) {
            if (!(v.thresholds[t] > 0.0 && v.thresholds[t] < 1.0) ||
                (t > 0 && !(v.thresholds[t] > v.thresholds[t - 1]))) {
                semantic(v, "thresholds of '" + v.name + "' must be strictly increasing inside (0,1)");
            }
        }
        doc.var_names.push_back(v.name);
        max_levels.push_back(static_cast<int>(v.levels - 1));
    }
    try {
        doc.space = StateSpace(max_levels);
    }
    catch (const ModelError& e) {
        semantic(raw.vars.front(), e.what());
    }
    const std::size_t n = doc.var_names.size();

    auto lookup_var = [&](const std::string& name, const Located& at) {
        auto it = var_index.find(name);
        if (it == var_index.end()) {
            semantic(at, "unknown variable '" + name + "'");
        }
        return it->second;
    };

    std::vector<double> decay(n, 1.0);
    std::vector<bool> decay_set(n, false);
    for (const auto& d : raw.decays) {
        const auto i = lookup_var(d.var, d);
        if (decay_set[i]) {
            semantic(d, "duplicate decay for '" + d.var + "'");
        }
        if (!(d.value > 0.0)) {
            semantic(d, "decay rate of '" + d.var + "' must be positive");
        }
        decay[i] = d.value;
        decay_set[i] = true;
    }

    std::map<std::string, std::size_t> slot_index;
    std::vector<std::string> slot_names;
    std::vector<double> exponents;
    for (const auto& e : raw.exponents) {
        if (!slot_index.emplace(e.name, slot_names.size()).second) {
            semantic(e, "duplicate exponent '" + e.name + "'");
        }
        const double value = e.value.value_or(options.default_exponent);
        if (!(value >= 1.0)) {
            semantic(e, "exponent '" + e.name + "' must be >= 1");
        }
        slot_names.push_back(e.name);
        exponents.push_back(value);
    }

    if (!raw.eqs.empty()) {
        std::vector<std::optional<HillExpression>> exprs(n);
        for (const auto& eq : raw.eqs) {
            const auto i = lookup_var(eq.var, eq);
            if (exprs[i]) {
                semantic(eq, "duplicate equation for '" + eq.var + "'");
            }
            HillExpression expr;
            const bool zero_expr =
                eq.products.size() == 1 && eq.products[0].factors.empty() && eq.products[0].coefficient == 0.0;
            if (!zero_expr) {
                for (const auto& p : eq.products) {
                    if (!(p.coefficient > 0.0)) {
                        semantic(p, "coefficients must be positive");
                    }
                    HillProduct prod;
                    prod.coefficient = p.coefficient;
                    for (const auto& f : p.factors) {
                        HillTerm term;
                        term.var = lookup_var(f.var, f);
                        term.orientation = f.orientation;
                        if (!(f.threshold > 0.0 && f.threshold < 1.0)) {
                            semantic(f, "Hill threshold must lie in (0,1)");
                        }
                        term.threshold = f.threshold;
                        auto s = slot_index.find(f.slot);
                        if (s == slot_index.end()) {
                            semantic(f, "unknown exponent '" + f.slot + "'");
                        }
                        term.exponent_slot = s->second;
                        prod.factors.push_back(term);
                    }
                    expr.terms.push_back(std::move(prod));
                }
            }
            exprs[i] = std::move(expr);
        }
        std::vector<HillExpression> expressions;
        for (std::size_t i = 0; i < n; ++i) {
            if (!exprs[i]) {
                semantic(raw.vars[i], "missing equation for variable '" + doc.var_names[i] + "'");
            }
            expressions.push_back(std::move(*exprs[i]));
        }
        try {
            doc.hill = HillSystem(std::move(expressions), decay, slot_names, exponents);
        }
        catch (const ModelError& e) {
            semantic(raw.eqs.front(), e.what());
        }
    }

    if (raw.table) {
        const auto& table = *raw.table;
        std::vector<std::uint32_t> images(doc.space.state_count());
        std::vector<bool> seen(doc.space.state_count(), false);
        auto to_state = [&](const std::vector<long>& values, const RawRow& row, const char* side) {
            if (values.size() != n) {
                semantic(row, std::string("table row ") + side + " has " + std::to_string(values.size()) +
                                  " entries, expected " + std::to_string(n));
            }
            DiscreteState s;
            for (std::size_t i = 0; i < n; ++i) {
                if (values[i] < 0 || values[i] > max_levels[i]) {
                    semantic(row, std::string("table ") + side + " value " + std::to_string(values[i]) +
                                      " out of range for '" + doc.var_names[i] + "'");
                }
                s.coords.push_back(static_cast<int>(values[i]));
            }
            return s;
        };
        for (const auto& row : table.rows) {
            const auto in = doc.space.index_of(to_state(row.inputs, row, "input"));
            const auto out = doc.space.index_of(to_state(row.outputs, row, "output"));
            if (seen[in]) {
                semantic(row, "duplicate table row for input " + doc.space.state_at(in).label());
            }
            seen[in] = true;
            images[in] = static_cast<std::uint32_t>(out);
        }
        auto missing = std::find(seen.begin(), seen.end(), false);
        if (missing != seen.end()) {
            const auto idx = static_cast<std::uint64_t>(missing - seen.begin());
            semantic(table, "table is not total: no row for input " + doc.space.state_at(idx).label());
        }
        doc.discrete = MultistateNetwork(doc.space, std::move(images));
    }

    if (!doc.hill && !doc.discrete) {
        semantic(raw.vars.front(), "model has neither equations nor a table");
    }

    const auto declared = std::count_if(raw.vars.begin(), raw.vars.end(), [](const RawVar& v) { return v.has_thresholds; });
    if (declared == static_cast<long>(n)) {
        std::vector<std::vector<double>> k;
        for (const auto& v : raw.vars) {
            k.push_back(v.thresholds);
        }
        doc.scheme = ThresholdScheme(std::move(k));
    }
    else if (doc.hill) {
        std::vector<std::vector<double>> k(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (raw.vars[i].has_thresholds) {
                k[i] = raw.vars[i].thresholds;
                continue;
            }
            k[i] = distinct_thresholds(*doc.hill, i);
            if (static_cast<int>(k[i].size()) != max_levels[i]) {
                semantic(raw.vars[i], "variable '" + doc.var_names[i] + "': Hill terms use " +
                                          std::to_string(k[i].size()) + " distinct thresholds, expected " +
                                          std::to_string(max_levels[i]));
            }
        }
        doc.scheme = ThresholdScheme(std::move(k));
    }
    else if (declared > 0) {
        auto it = std::find_if(raw.vars.begin(), raw.vars.end(), [](const RawVar& v) { return !v.has_thresholds; });
        semantic(*it, "variable '" + it->name + "' has no thresholds while others do");
    }
    return doc;
}

} // namespace

ModelDocument parse_model(std::string_view text, const ParseOptions& options)
{
    return resolve(parse_raw(text), options);
}

ModelDocument load_model(const std::string& path, const ParseOptions& options)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open model file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str(), options);
}

ThresholdScheme derive_scheme(const HillSystem& sys, const StateSpace& space)
{
    if (space.n_vars() != sys.n_vars()) {
        throw ModelError("state space and Hill system differ in dimension");
    }
    std::vector<std::vector<double>> k(sys.n_vars());
    for (std::size_t j = 0; j < k.size(); ++j) {
        k[j] = distinct_thresholds(sys, j);
        const auto expected = static_cast<std::size_t>(space.max_level(j));
        if (k[j].size() != expected) {
            throw ThresholdMismatch(j, k[j].size(), expected,
                                    "variable " + std::to_string(j + 1) + ": Hill terms use " +
                                        std::to_string(k[j].size()) + " distinct thresholds, expected " +
                                        std::to_string(expected));
        }
    }
    return ThresholdScheme(std::move(k));
}

std::string serialize_model(const ModelDocument& doc)
{
    std::ostringstream os;
    if (!doc.name.empty()) {
        os << "system " << doc.name << '\n';
    }
    for (std::size_t i = 0; i < doc.n_vars(); ++i) {
        os << "var " << doc.var_names[i] << " levels " << doc.space.max_level(i) + 1;
        if (doc.scheme) {
            os << " thresholds";
            for (double k : doc.scheme->thresholds(i)) {
                os << ' ' << format_real(k);
            }
        }
        os << '\n';
    }
    if (doc.hill) {
        const auto& sys = *doc.hill;
        for (std::size_t i = 0; i < doc.n_vars(); ++i) {
            os << "decay " << doc.var_names[i] << ' ' << format_real(sys.decay()[i]) << '\n';
        }
        for (std::size_t s = 0; s < sys.slot_names().size(); ++s) {
            os << "exponent " << sys.slot_names()[s] << " = " << format_real(sys.exponents()[s]) << '\n';
        }
        for (std::size_t i = 0; i < doc.n_vars(); ++i) {
            os << "eq " << doc.var_names[i] << " =";
            const auto& terms = sys.expression(i).terms;
            if (terms.empty()) {
                os << " 0";
            }
            for (std::size_t t = 0; t < terms.size(); ++t) {
                os << (t ? " + " : " ") << format_real(terms[t].coefficient);
                for (const auto& f : terms[t].factors) {
                    os << " * " << to_string(f.orientation) << '(' << doc.var_names[f.var] << ", "
                       << format_real(f.threshold) << ", " << sys.slot_names()[f.exponent_slot] << ')';
                }
            }
            os << '\n';
        }
    }
    if (doc.discrete) {
        const auto& mn = *doc.discrete;
        os << "table\n";
        for (std::uint64_t s = 0; s < mn.state_count(); ++s) {
            const auto in = mn.space().state_at(s);
            const auto out = mn.space().state_at(mn.image(s));
            for (std::size_t i = 0; i < in.size(); ++i) {
                os << (i ? " " : "") << in[i];
            }
            os << " ->";
            for (std::size_t i = 0; i < out.size(); ++i) {
                os << ' ' << out[i];
            }
            os << '\n';
        }
    }
    return os.str();
}

} // namespace ssmap
