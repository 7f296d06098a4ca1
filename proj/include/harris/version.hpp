#pragma once

namespace harris {

inline const char* version_string() {
#ifdef HARRIS_VERSION
    return HARRIS_VERSION;
#else
    return "0.1.0";
#endif
}

}  // namespace harris
