#include "ecgdigi/binarize.hpp"

#include "ecgdigi/image_io.hpp"
#include "ecgdigi/subprocess.hpp"

#include <cmath>
#include <filesystem>

namespace ecgdigi {

void PreprocessSpec::validate() const {
    if (sharpen_kernel.size < 1 || sharpen_kernel.size % 2 == 0 ||
        sharpen_kernel.weights.size() != static_cast<std::size_t>(sharpen_kernel.size * sharpen_kernel.size))
        fail(ErrorCode::InvalidArgument, "sharpen kernel must be square with odd size");
    if (!(gaussian_sigma >= 0.0)) fail(ErrorCode::InvalidArgument, "gaussian sigma must be >= 0");
    if (gaussian_kernel_size < 1 || gaussian_kernel_size % 2 == 0)
        fail(ErrorCode::InvalidArgument, "gaussian kernel size must be odd");
}

RasterImage preprocess(const RasterImage& lead, const PreprocessSpec& spec) {
    spec.validate();
    return gaussian_blur(convolve(lead, spec.sharpen_kernel), spec.gaussian_sigma, spec.gaussian_kernel_size);
}

void ThresholdSpec::validate() const {
    if (window < 3 || window % 2 == 0) fail(ErrorCode::InvalidArgument, "threshold window must be odd and >= 3");
    if (min_component_area < 0) fail(ErrorCode::InvalidArgument, "min component area must be >= 0");
    if (!std::isfinite(bias)) fail(ErrorCode::InvalidArgument, "threshold bias must be finite");
}

Plane local_mean(const Plane& plane, int window) {
    const int w = plane.width, h = plane.height, r = window / 2;
    // Summed-area table with a zero border row/column.
    std::vector<double> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
    auto s = [&](int x, int y) -> double& { return sat[static_cast<std::size_t>(y) * (w + 1) + x]; };
    for (int y = 0; y < h; ++y) {
        double row = 0.0;
        for (int x = 0; x < w; ++x) {
            row += plane.at(x, y);
            s(x + 1, y + 1) = s(x + 1, y) + row;
        }
    }
    Plane out(w, h);
    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(0, y - r), y1 = std::min(h, y + r + 1);
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(0, x - r), x1 = std::min(w, x + r + 1);
            const double sum = s(x1, y1) - s(x0, y1) - s(x1, y0) + s(x0, y0);
            out.at(x, y) = sum / ((x1 - x0) * (y1 - y0));
        }
    }
    return out;
}

BinaryImage threshold_against(const Plane& luminance, const Plane& means, double bias) {
    BinaryImage out(luminance.width, luminance.height);
    for (int y = 0; y < luminance.height; ++y)
        for (int x = 0; x < luminance.width; ++x) out.set(x, y, luminance.at(x, y) < means.at(x, y) - bias);
    return out;
}

BinaryImage remove_small_components(const BinaryImage& mask, int min_area) {
    if (min_area <= 1) return mask;
    const int w = mask.width(), h = mask.height();
    BinaryImage out = mask;
    std::vector<std::uint8_t> visited(static_cast<std::size_t>(w) * h, 0);
    std::vector<int> stack, component;
    for (int sy = 0; sy < h; ++sy)
        for (int sx = 0; sx < w; ++sx) {
            const int start = sy * w + sx;
            if (!mask.at(sx, sy) || visited[start]) continue;
            component.clear();
            stack.assign(1, start);
            visited[start] = 1;
            while (!stack.empty()) {
                const int p = stack.back();
                stack.pop_back();
                component.push_back(p);
                const int px = p % w, py = p / w;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = px + dx, ny = py + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        const int q = ny * w + nx;
                        if (!visited[q] && mask.at(nx, ny)) {
                            visited[q] = 1;
                            stack.push_back(q);
                        }
                    }
            }
            if (static_cast<int>(component.size()) < min_area)
                for (int p : component) out.set(p % w, p / w, false);
        }
    return out;
}

BinaryImage binarize_builtin(const RasterImage& lead, const ThresholdSpec& spec) {
    spec.validate();
    Plane lum = luminance_plane(lead);
    // Grid suppression: red-dominant pixels read as blank paper.
    const auto grid = red_dominance(lead, spec.red_tolerance);
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i]) lum.data[i] = 255.0;
    const BinaryImage raw = threshold_against(lum, local_mean(lum, spec.window), spec.bias);
    return remove_small_components(raw, spec.min_component_area);
}

BinaryImage binarize_external(const RasterImage& lead, const ExternalCommand& command,
                              const std::map<std::string, std::string>& extra) {
    if (command.command_template.find("{input}") == std::string::npos ||
        command.command_template.find("{output}") == std::string::npos)
        fail(ErrorCode::InvalidArgument, "binarizer command must contain {input} and {output}");

    ScratchDir dir("binarize");
    const auto in_path = dir.path() / "input.png";
    const auto out_path = dir.path() / "output.png";
    write_png(in_path, resize_bilinear(to_rgb(lead), kExternalSide, kExternalSide));

    auto values = extra;
    values["input"] = in_path.string();
    values["output"] = out_path.string();
    const std::string cmd = expand_template(command.command_template, values);
    const CommandResult res = run_command(cmd, command.timeout);
    if (res.timed_out) fail(ErrorCode::StageFailure, "external binarizer timed out: " + res.err);
    if (res.exit_status != 0)
        fail(ErrorCode::StageFailure,
             "external binarizer exited with status " + std::to_string(res.exit_status) + ": " + res.err);
    if (!std::filesystem::exists(out_path))
        fail(ErrorCode::StageFailure, "external binarizer produced no output image: " + res.err);

    const RasterImage produced = read_png(out_path);
    if (produced.width() != kExternalSide || produced.height() != kExternalSide)
        fail(ErrorCode::StageFailure, "external binarizer output is " + std::to_string(produced.width()) + "x" +
                                          std::to_string(produced.height()) + ", expected 256x256");
    return resize_nearest(threshold_mid(produced), lead.width(), lead.height());
}

}  // namespace ecgdigi
