#pragma once

// `cairo` command line: ingest, reason, query, export-owl, import-owl, sweep,
// lint, gen-fixtures and serve. Exit codes: 0 ok, 1 findings, 2 errors.

#include <ostream>

namespace cairo {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cairo
