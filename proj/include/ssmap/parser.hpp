#pragma once

// Plain-text model language.
//
//   system toy
//   var x1 levels 3 thresholds 0.3 0.6
//   decay x1 1
//   exponent n1 = 2
//   eq x1 = 0.8 * act(x1, 0.3, n1) + 0.6 * act(x2, 0.7, n2) * rep(x1, 0.3, n3)
//   table
//   0 0 -> 0 0
//   ...
//
// `levels` counts the values a variable takes, so a variable with `levels L`
// ranges over {0..L-1} and needs L-1 thresholds. Lines may end in `# comment`.

#include "ssmap/errors.hpp"
#include "ssmap/model.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ssmap {

class ParseError : public Error {
public:
    enum class Kind { syntax, semantic };

    ParseError(Kind kind, std::size_t line, std::size_t column, const std::string& message);

    Kind kind() const noexcept { return kind_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::string& message() const noexcept { return message_; }

private:
    Kind kind_;
    std::size_t line_;
    std::size_t column_;
    std::string message_;
};

struct ModelDocument {
    std::string name;
    std::vector<std::string> var_names;
    StateSpace space;
    std::optional<HillSystem> hill;
    std::optional<ThresholdScheme> scheme;
    std::optional<MultistateNetwork> discrete;
    /// Value given to `exponent` stanzas that carry no "= value".
    double default_exponent = 10.0;

    std::size_t n_vars() const noexcept { return var_names.size(); }
    bool operator==(const ModelDocument&) const = default;
};

struct ParseOptions {
    double default_exponent = 10.0;
};

ModelDocument parse_model(std::string_view text, const ParseOptions& options = {});
ModelDocument load_model(const std::string& path, const ParseOptions& options = {});

/// Thresholds read off the Hill terms; variable j must use exactly m_j distinct values.
ThresholdScheme derive_scheme(const HillSystem& sys, const StateSpace& space);

/// Canonical text: header, variables, decays, exponents, equations, table.
std::string serialize_model(const ModelDocument& doc);

/// %.12g formatting shared by every text/JSON writer.
std::string format_real(double value);

} // namespace ssmap
