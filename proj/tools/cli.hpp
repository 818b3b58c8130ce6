#pragma once

#include <ostream>

namespace conecount::cli {

// Exit codes: 0 success, 1 usage or input error, 2 experiment verdict failure.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace conecount::cli
