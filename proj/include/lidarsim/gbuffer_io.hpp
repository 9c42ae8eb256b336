#pragma once

#include "lidarsim/scene.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace lidarsim
{

enum class RangePrecision
{
    f32,
    f64,
};

/**
 * G-buffer container: a text header terminated by `end_header`, followed by
 * raw little-endian planes in the order listed under `planes=`. Each plane is
 * width * height values, row-major; all planes are 32-bit floats except
 * `range`, which may be 64-bit when no z-buffer quantization was applied.
 */
void write_gbuffer(const GBuffer& g, std::ostream& out, RangePrecision range_precision = RangePrecision::f32);
void write_gbuffer(const GBuffer& g, const std::filesystem::path& path,
                   RangePrecision range_precision = RangePrecision::f32);

GBuffer read_gbuffer(std::istream& in, const std::string& source);
GBuffer read_gbuffer(const std::filesystem::path& path);

} // namespace lidarsim
