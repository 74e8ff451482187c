#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace salt {

inline constexpr const char* kToolVersion = "1.0.0";

/// Exit codes: 0 pass, 1 check failed or run aborted, 2 usage or config error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

}  // namespace salt
