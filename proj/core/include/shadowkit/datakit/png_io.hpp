#pragma once

#include <string>
#include <string_view>

#include "shadowkit/datakit/sample.hpp"

namespace shadowkit::datakit {

/// 8-bit RGB PNG; each value is stored as round(v * 255).
std::string encode_png(const Image& image);
/// 8-bit grayscale PNG; 0 = background, 255 = shadow.
std::string encode_png(const Mask& mask);

/// `name` only labels error messages.
Image decode_png_image(std::string_view bytes, const std::string& name);
Mask decode_png_mask(std::string_view bytes, const std::string& name);

}  // namespace shadowkit::datakit
