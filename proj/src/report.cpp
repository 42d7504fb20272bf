#include "wpm/common.hpp"

namespace wpm {
}  // namespace wpm
