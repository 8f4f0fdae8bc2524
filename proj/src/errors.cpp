#include "shadeloss/errors.hpp"

namespace shadeloss {

InputError::InputError(std::size_t line, const std::string& what)
    : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

}  // namespace shadeloss
