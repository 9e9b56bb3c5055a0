#pragma once

#include <istream>
#include <ostream>

#include "hitcast/errors.hpp"

namespace hitcast::detail {

template <typename T>
void write_pod(std::ostream& os, T x) {
    os.write(reinterpret_cast<const char*>(&x), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T x{};
    is.read(reinterpret_cast<char*>(&x), sizeof(T));
    if (!is) throw FormatError("truncated file");
    return x;
}

}  // namespace hitcast::detail
