#pragma once

#include <stdexcept>

namespace rcr {

struct cap_exceeded_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct no_path_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rcr
