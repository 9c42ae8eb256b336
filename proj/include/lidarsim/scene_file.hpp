#pragma once

#include "lidarsim/scene.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace lidarsim
{

/// Contents of a scene description file (YAML, schema in README).
struct SceneFile
{
    Scene scene;
    std::optional<PinholeProjection> projection;
    RenderOptions render;
};

SceneFile load_scene(const std::filesystem::path& path);
SceneFile parse_scene(const std::string& text, const std::string& source = "<string>");

} // namespace lidarsim
