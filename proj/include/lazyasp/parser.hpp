#pragma once

#include "program.hpp"

#include <cctype>
#include <charconv>
#include <istream>
#include <iterator>

namespace lazyasp {

class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line, std::size_t column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg), line_(line), column_(column) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Recognized but deliberately unsupported syntax (aggregates, bounds, ...).
class UnsupportedFeature : public ParseError {
public:
    using ParseError::ParseError;
};

struct SafetyViolation {
    std::size_t              line{0};
    std::string              rule;
    std::vector<std::string> variables;
};

class SafetyError : public Error {
public:
    explicit SafetyError(std::vector<SafetyViolation> v) : Error(describe(v)), violations_(std::move(v)) {}
    [[nodiscard]] const std::vector<SafetyViolation>& violations() const noexcept { return violations_; }

private:
    static std::string describe(const std::vector<SafetyViolation>& v) {
        std::string out;
        for (const auto& x : v) {
            if (!out.empty()) {
                out += '\n';
            }
            out += std::to_string(x.line) + ": unsafe variables";
            for (const auto& name : x.variables) {
                out += ' ' + name;
            }
            out += " in rule " + x.rule;
        }
        return out;
    }
    std::vector<SafetyViolation> violations_;
};

/// `{h} :- body.` as the pair `h :- body, not h'.` and `h' :- body, not h.`
/// where h' is the reserved complement of h.
[[nodiscard]] inline std::pair<Rule, Rule> desugar_choice(const Atom& head, const std::vector<Atom>& positive_body,
                                                         const std::vector<Atom>& negative_body) {
    Atom co = complement_atom(head);
    Rule in{head, positive_body, negative_body};
    in.negative_body.push_back(co);
    Rule out{co, positive_body, negative_body};
    out.negative_body.push_back(head);
    return {std::move(in.normalize()), std::move(out.normalize())};
}

struct ParseOptions {
    /// Accept '_'-prefixed predicate names (used to re-read printed programs
    /// that already contain complement atoms).
    bool allow_reserved{false};
};

namespace detail {

class Parser {
public:
    Parser(std::string_view text, ParseOptions opts) : text_(text), opts_(opts) {}

    Program run() {
        Program                      prog;
        std::vector<SafetyViolation> unsafe;
        skip_ws();
        while (!eof()) {
            std::size_t line  = line_;
            auto        rules = statement();
            for (auto& r : rules) {
                if (auto check = check_safety(r); !check.ok()) {
                    unsafe.push_back({line, r.to_string(), check.unsafe_variables});
                    break;
                }
            }
            for (auto& r : rules) {
                prog.rules.push_back(std::move(r));
            }
            skip_ws();
        }
        if (!unsafe.empty()) {
            throw SafetyError(std::move(unsafe));
        }
        return prog;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }
    [[noreturn]] void unsupported(const std::string& msg) const { throw UnsupportedFeature(msg, line_, col_); }

    [[nodiscard]] bool eof() const { return pos_ >= text_.size(); }
    [[nodiscard]] char peek(std::size_t off = 0) const {
        return pos_ + off < text_.size() ? text_[pos_ + off] : '\0';
    }
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        }
        else {
            ++col_;
        }
        ++pos_;
    }

    void skip_ws() {
        while (!eof()) {
            char c = peek();
            if (c == '%') {
                while (!eof() && peek() != '\n') {
                    advance();
                }
            }
            else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            }
            else {
                break;
            }
        }
    }

    bool accept(std::string_view tok) {
        skip_ws();
        if (text_.substr(pos_, tok.size()) == tok) {
            for (std::size_t i = 0; i < tok.size(); ++i) {
                advance();
            }
            return true;
        }
        return false;
    }

    void expect(std::string_view tok) {
        if (!accept(tok)) {
            fail("expected '" + std::string(tok) + "'");
        }
    }

    static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

    std::string identifier() {
        std::string out;
        while (!eof() && ident_char(peek())) {
            out += peek();
            advance();
        }
        return out;
    }

    void reject_extensions() {
        skip_ws();
        switch (peek()) {
            case '#': unsupported("directives are not supported");
            case '|': unsupported("disjunction is not supported");
            case ';': unsupported("disjunction is not supported");
            case '<':
            case '>':
            case '=':
            case '!': unsupported("comparison built-ins are not supported");
            case '+':
            case '*':
            case '/': unsupported("arithmetic is not supported");
            default: break;
        }
    }

    Term term() {
        skip_ws();
        char c = peek();
        if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
            std::string digits;
            if (c == '-') {
                digits += c;
                advance();
            }
            while (std::isdigit(static_cast<unsigned char>(peek()))) {
                digits += peek();
                advance();
            }
            std::int64_t value = 0;
            auto [ptr, ec]     = std::from_chars(digits.data(), digits.data() + digits.size(), value);
            if (ec != std::errc() || ptr != digits.data() + digits.size()) {
                fail("malformed integer '" + digits + "'");
            }
            return Term::integer(value);
        }
        if (std::isupper(static_cast<unsigned char>(c))) {
            return Term::variable(identifier());
        }
        if (std::islower(static_cast<unsigned char>(c))) {
            auto name = identifier();
            if (peek() == '(') {
                unsupported("function symbols are not supported");
            }
            return Term::symbol(name);
        }
        if (c == '_') {
            unsupported("anonymous variables are not supported");
        }
        if (c == '"') {
            unsupported("string constants are not supported");
        }
        fail("expected term");
    }

    Atom atom() {
        skip_ws();
        char c = peek();
        bool reserved = c == '_' && opts_.allow_reserved;
        if (!std::islower(static_cast<unsigned char>(c)) && !reserved) {
            if (c == '_') {
                fail("identifiers starting with '_' are reserved");
            }
            fail("expected atom");
        }
        Atom a(identifier());
        if (a.predicate == "not") {
            fail("'not' is a keyword");
        }
        if (peek() == '(') {
            advance();
            a.args.push_back(term());
            while (accept(",")) {
                a.args.push_back(term());
            }
            reject_extensions();
            expect(")");
        }
        return a;
    }

    bool keyword_not() {
        skip_ws();
        if (text_.substr(pos_, 3) == "not" && !ident_char(peek(3))) {
            for (int i = 0; i < 3; ++i) {
                advance();
            }
            return true;
        }
        return false;
    }

    void body(std::vector<Atom>& pos, std::vector<Atom>& neg) {
        do {
            reject_extensions();
            if (keyword_not()) {
                neg.push_back(atom());
            }
            else {
                skip_ws();
                char c = peek();
                if (std::isupper(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) ||
                    c == '-') {
                    unsupported("comparison built-ins are not supported");
                }
                pos.push_back(atom());
            }
            reject_extensions();
        } while (accept(","));
    }

    std::vector<Rule> statement() {
        skip_ws();
        reject_extensions();
        if (std::isdigit(static_cast<unsigned char>(peek()))) {
            unsupported("cardinality bounds on choice rules are not supported");
        }
        std::vector<Atom> pos, neg;
        if (accept("{")) {
            skip_ws();
            if (peek() == '}') {
                unsupported("empty choice rules are not supported");
            }
            Atom head = atom();
            skip_ws();
            if (peek() == ';' || peek() == ',' || peek() == ':') {
                unsupported("choice rules support a single unconditional element");
            }
            expect("}");
            skip_ws();
            if (std::isdigit(static_cast<unsigned char>(peek()))) {
                unsupported("cardinality bounds on choice rules are not supported");
            }
            if (accept(":-")) {
                body(pos, neg);
            }
            expect(".");
            // Safety is checked on the choice rule itself; its two desugared
            // rules are safe iff it is.
            Rule original{head, pos, neg};
            if (auto check = check_safety(original); !check.ok()) {
                return {original};
            }
            auto [in, out] = desugar_choice(head, pos, neg);
            return {std::move(in), std::move(out)};
        }
        Rule r;
        if (accept(":-")) {
            body(r.positive_body, r.negative_body);
        }
        else {
            r.head = atom();
            reject_extensions();
            if (accept(":-")) {
                body(r.positive_body, r.negative_body);
            }
        }
        expect(".");
        r.normalize();
        return {std::move(r)};
    }

    std::string_view text_;
    ParseOptions     opts_;
    std::size_t      pos_{0};
    std::size_t      line_{1};
    std::size_t      col_{1};
};

} // namespace detail

/// Parses the rule language: facts, normal rules, constraints, and
/// single-atom choice rules (desugared on the fly). Throws ParseError,
/// UnsupportedFeature or SafetyError.
[[nodiscard]] inline Program parse_program(std::string_view text, ParseOptions opts = {}) {
    return detail::Parser(text, opts).run();
}

[[nodiscard]] inline Program parse_program(std::istream& in, ParseOptions opts = {}) {
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return parse_program(text, opts);
}

/// Parses one `{a, b(1), ...}` answer-set line into ground atoms.
[[nodiscard]] inline std::set<Atom> parse_answer_set(std::string_view line) {
    auto open  = line.find('{');
    auto close = line.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
        throw ParseError("expected '{...}'", 1, 1);
    }
    std::string body(line.substr(open + 1, close - open - 1));
    std::set<Atom> out;
    if (body.find_first_not_of(" \t") == std::string::npos) {
        return out;
    }
    // Reuse the statement parser: "a. b(1). ..." after splitting on top-level commas.
    std::string facts;
    int         depth = 0;
    for (char c : body) {
        if (c == '(') {
            ++depth;
        }
        else if (c == ')') {
            --depth;
        }
        if (c == ',' && depth == 0) {
            facts += ".\n";
        }
        else {
            facts += c;
        }
    }
    facts += ".\n";
    for (const auto& r : parse_program(facts).rules) {
        if (!r.is_fact() || !r.head->is_ground()) {
            throw ParseError("answer sets contain ground atoms only", 1, 1);
        }
        out.insert(*r.head);
    }
    return out;
}

} // namespace lazyasp
