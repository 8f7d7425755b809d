#pragma once

#include <functional>
#include <iostream>
#include <string>
#include <utility>

namespace spectralens {

using WarningSink = std::function<void(const std::string&)>;

namespace detail {
inline WarningSink& warning_sink() {
    static WarningSink sink = [](const std::string& msg) { std::cerr << "spectralens: warning: " << msg << '\n'; };
    return sink;
}
}  // namespace detail

/// Replace the warning handler. Pass an empty function to silence warnings.
inline void set_warning_sink(WarningSink sink) { detail::warning_sink() = std::move(sink); }

inline void warn(const std::string& msg) {
    if (auto& sink = detail::warning_sink()) {
        sink(msg);
    }
}

}  // namespace spectralens
