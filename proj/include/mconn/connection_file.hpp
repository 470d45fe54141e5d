#pragma once

#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "connection.hpp"
#include "expr.hpp"

namespace mconn {

// Connection file format:
//
//   rank <int>
//   splitting <int> ... <int>
//   point <gauss-rat> order <posint>     # one line per singular point
//   matrix
//   <expr> ... <expr>                    # rank rows of rank entries
//   end
//
// '#' starts a comment. Matrix entries are separated by whitespace outside
// parentheses, so an entry containing spaces must be parenthesised.

class ValidationFailed : public Error {
public:
    explicit ValidationFailed(ValidationReport rep)
        : Error(ErrorKind::ValidationFailed, rep.str()), report_(std::move(rep))
    {
    }
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

namespace detail {

struct Token {
    std::string text;
    int col;
};

inline std::vector<Token> split_entries(std::string_view line, int line_no)
{
    std::vector<Token> out;
    int depth = 0;
    std::size_t start = std::string_view::npos;
    for (std::size_t k = 0; k <= line.size(); ++k) {
        char c = k < line.size() ? line[k] : ' ';
        bool ws = std::isspace(static_cast<unsigned char>(c));
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (depth < 0) throw ParseError(line_no, static_cast<int>(k) + 1, "unbalanced ')'");
        if (ws && depth == 0) {
            if (start != std::string_view::npos) {
                out.push_back({std::string(line.substr(start, k - start)), static_cast<int>(start) + 1});
                start = std::string_view::npos;
            }
        } else if (start == std::string_view::npos) {
            start = k;
        }
    }
    if (depth != 0) throw ParseError(line_no, static_cast<int>(line.size()), "unbalanced '('");
    return out;
}

inline int parse_int(const Token& tok, int line_no)
{
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(tok.text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != tok.text.size() || tok.text.empty()) throw ParseError(line_no, tok.col, "expected an integer, got '" + tok.text + "'");
    return v;
}

} // namespace detail

/// Parses the text form into an unvalidated spec. Syntax errors raise ParseError.
inline ConnectionSpec parse_connection_spec(std::string_view text)
{
    ConnectionSpec spec;
    int rank = -1;
    bool have_splitting = false, in_matrix = false, done = false;
    std::vector<Divisor::Entry> points;
    std::vector<std::vector<RatFun>> rows;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
        auto toks = detail::split_entries(line, line_no);
        if (toks.empty()) continue;
        if (done) throw ParseError(line_no, toks[0].col, "content after 'end'");
        if (in_matrix) {
            if (toks[0].text == "end") {
                if (toks.size() != 1) throw ParseError(line_no, toks[1].col, "unexpected token after 'end'");
                done = true;
                continue;
            }
            if (static_cast<int>(toks.size()) != rank)
                throw ParseError(line_no, toks[0].col,
                                 "matrix row has " + std::to_string(toks.size()) + " entries, rank is " + std::to_string(rank));
            if (static_cast<int>(rows.size()) == rank) throw ParseError(line_no, toks[0].col, "too many matrix rows");
            std::vector<RatFun> row;
            for (const auto& t : toks) row.push_back(parse_ratfun(t.text, line_no, t.col));
            rows.push_back(std::move(row));
            continue;
        }
        const std::string& kw = toks[0].text;
        if (kw == "rank") {
            if (rank != -1) throw ParseError(line_no, toks[0].col, "duplicate 'rank'");
            if (toks.size() != 2) throw ParseError(line_no, toks[0].col, "usage: rank <int>");
            rank = detail::parse_int(toks[1], line_no);
            if (rank < 1) throw ParseError(line_no, toks[1].col, "rank must be >= 1");
        } else if (kw == "splitting") {
            if (rank == -1) throw ParseError(line_no, toks[0].col, "'splitting' before 'rank'");
            if (have_splitting) throw ParseError(line_no, toks[0].col, "duplicate 'splitting'");
            if (static_cast<int>(toks.size()) - 1 != rank)
                throw ParseError(line_no, toks[0].col, "splitting has " + std::to_string(toks.size() - 1) + " twists, rank is " + std::to_string(rank));
            for (std::size_t k = 1; k < toks.size(); ++k) spec.splitting.twists.push_back(detail::parse_int(toks[k], line_no));
            have_splitting = true;
        } else if (kw == "point") {
            if (toks.size() != 4 || toks[2].text != "order") throw ParseError(line_no, toks[0].col, "usage: point <gauss-rat> order <posint>");
            GaussRat p = parse_gauss(toks[1].text, line_no, toks[1].col);
            int ord = detail::parse_int(toks[3], line_no);
            if (ord < 1) throw ParseError(line_no, toks[3].col, "order must be a positive integer");
            for (const auto& e : points)
                if (e.point == Point(p)) throw ParseError(line_no, toks[1].col, "duplicate point " + p.str());
            points.push_back({Point(p), ord});
        } else if (kw == "matrix") {
            if (rank == -1 || !have_splitting) throw ParseError(line_no, toks[0].col, "'matrix' before 'rank' and 'splitting'");
            if (toks.size() != 1) throw ParseError(line_no, toks[1].col, "unexpected token after 'matrix'");
            in_matrix = true;
        } else {
            throw ParseError(line_no, toks[0].col, "unknown keyword '" + kw + "'");
        }
    }
    if (!done) throw ParseError(line_no, 1, in_matrix ? "missing 'end'" : "missing 'matrix' block");
    if (static_cast<int>(rows.size()) != rank)
        throw ParseError(line_no, 1, "matrix has " + std::to_string(rows.size()) + " rows, rank is " + std::to_string(rank));
    spec.divisor = Divisor(std::move(points));
    spec.matrix = RatMat(static_cast<std::size_t>(rank), static_cast<std::size_t>(rank));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) spec.matrix(i, j) = rows[i][j];
    return spec;
}

/// Parses and validates; an invalid connection raises ValidationFailed.
inline Connection parse_connection_file(std::string_view text)
{
    ConnectionSpec spec = parse_connection_spec(text);
    ValidationReport rep = validate(spec);
    if (!rep.ok) throw ValidationFailed(std::move(rep));
    return Connection(std::move(spec));
}

/// Expression text without whitespace, so that it is a single matrix entry.
inline std::string compact(const std::string& s)
{
    std::string out;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
    return out;
}

inline std::string format_connection(const ConnectionSpec& spec, const std::string& header = {})
{
    std::ostringstream os;
    if (!header.empty()) os << "# " << header << "\n";
    os << "rank " << spec.rank() << "\n";
    os << "splitting";
    for (int a : spec.splitting.twists) os << " " << a;
    os << "\n";
    for (const auto& e : spec.divisor.entries()) os << "point " << compact(e.point.str()) << " order " << e.order << "\n";
    os << "matrix\n";
    for (std::size_t i = 0; i < spec.rank(); ++i) {
        for (std::size_t j = 0; j < spec.rank(); ++j) os << (j ? " " : "") << compact(spec.matrix(i, j).str());
        os << "\n";
    }
    os << "end\n";
    return os.str();
}

} // namespace mconn
