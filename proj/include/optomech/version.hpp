#ifndef OPTOMECH_VERSION_HPP
#define OPTOMECH_VERSION_HPP

namespace optomech {

inline constexpr const char* k_version = "0.1.0";

} // namespace optomech

#endif
