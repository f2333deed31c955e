#include "roughsk/errors.hpp"

namespace roughsk {

UnknownModel::UnknownModel(const std::string& name)
    : Error("unknown model '" + name + "'") {}

}  // namespace roughsk
