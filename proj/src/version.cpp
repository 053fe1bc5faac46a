#include "nlheat/io.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fftw3.h>

namespace nlheat {

nlohmann::json build_info() {
    nlohmann::json j;
    j["nlheat"] = NLHEAT_VERSION;
    j["compiler"] = __VERSION__;
    j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
    j["boost"] = BOOST_LIB_VERSION;
    j["fftw"] = std::string(fftw_version);
    j["json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                std::to_string(NLOHMANN_JSON_VERSION_PATCH);
    return j;
}

}  // namespace nlheat
