#pragma once

#include <iosfwd>

namespace ttoi::cli {

enum ExitCode : int {
    kOk = 0,
    kUnexpected = 1,
    kArgument = 2,
    kFormat = 3,
    kNumeric = 4,
};

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace ttoi::cli
