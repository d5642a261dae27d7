#include "csma/utility_fn.hpp"

namespace csma {

std::shared_ptr<const UtilityFn> make_utility(const std::string& kind, double alpha) {
    if (kind == "log1p") return std::make_shared<LogUtility>();
    if (kind == "alpha_fair") return std::make_shared<AlphaFairUtility>(alpha);
    throw std::invalid_argument("unknown utility kind: " + kind);
}

}  // namespace csma
