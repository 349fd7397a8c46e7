#pragma once

#include "ssmap/correspondence.hpp"
#include "ssmap/discrete.hpp"
#include "ssmap/parser.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ssmap::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kPartial = 1,
    kParseError = 2,
    kSemanticError = 3,
    kFailed = 4,
};

int exit_code_for(Verdict v);

/// Rounds to 12 significant digits so dumps are stable across platforms.
double canonical(double value);

nlohmann::json report_to_json(const CorrespondenceReport& report, const ModelDocument& doc);
nlohmann::json pfvs_to_json(const PfvsResult& result, const ModelDocument& doc, const std::string& source);

/// Runs the command line; everything is written to `out` / `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ssmap::cli
