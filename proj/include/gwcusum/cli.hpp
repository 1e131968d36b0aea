#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gwcusum {

/// Entry point of the `gwcusum` tool. `args` excludes the program name.
/// Exit codes: 0 success, 1 configuration or runtime error, 2 usage error.
int cli_main(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);
int cli_main(const std::vector<std::string>& args);

}  // namespace gwcusum
