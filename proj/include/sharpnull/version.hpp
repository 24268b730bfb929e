#ifndef SHARPNULL_VERSION_HPP
#define SHARPNULL_VERSION_HPP

namespace sharpnull {
inline constexpr const char* version = "0.1.0";
}

#endif
