#include "selfseg/errors.hpp"

#include <utility>

namespace selfseg {

StageError::StageError(std::string stage, const std::string& what, bool transport)
    : Error("[" + stage + "] " + what), stage_(std::move(stage)), transport_(transport) {}

}  // namespace selfseg
