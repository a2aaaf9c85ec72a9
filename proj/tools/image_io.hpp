#pragma once

#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "nucleograde/image.hpp"
#include "nucleograde/pipeline.hpp"

namespace cli {

/// 8-bit RGB from PNG or TIFF. Grayscale inputs are replicated.
inline nucleograde::RgbImage read_rgb(const std::string& path) {
    const cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
    if (bgr.empty()) throw nucleograde::Error(nucleograde::ErrorCode::InvalidImage, "cannot decode " + path);
    nucleograde::RgbImage img(bgr.cols, bgr.rows);
    for (int y = 0; y < bgr.rows; ++y) {
        const auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x) img(x, y) = {row[x][2], row[x][1], row[x][0]};
    }
    return img;
}

inline void write_rgb(const std::string& path, const nucleograde::RgbImage& img) {
    cv::Mat bgr(img.height(), img.width(), CV_8UC3);
    for (int y = 0; y < img.height(); ++y) {
        auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < img.width(); ++x) row[x] = {img(x, y).b, img(x, y).g, img(x, y).r};
    }
    if (!cv::imwrite(path, bgr)) throw nucleograde::Error(nucleograde::ErrorCode::IoError, "cannot write " + path);
}

/// 16-bit label image: 0 background, nuclei numbered in report order.
inline void write_labels(const std::string& path, const nucleograde::pipeline::ImageResult& r) {
    cv::Mat labels(r.height, r.width, CV_16UC1, cv::Scalar(0));
    int next = 0;
    for (const auto& q : r.quarters) {
        for (const auto& n : q.nuclei) {
            ++next;
            const auto value = static_cast<std::uint16_t>(std::min(next, 65535));
            const auto& reg = n.region;
            for (int y = 0; y < reg.mask.height(); ++y)
                for (int x = 0; x < reg.mask.width(); ++x)
                    if (reg.mask(x, y)) labels.at<std::uint16_t>(reg.y0 + y, reg.x0 + x) = value;
        }
    }
    if (!cv::imwrite(path, labels)) throw nucleograde::Error(nucleograde::ErrorCode::IoError, "cannot write " + path);
}

/// Boundaries in red, seeds as green crosses.
inline nucleograde::RgbImage overlay(const nucleograde::RgbImage& img, const nucleograde::pipeline::ImageResult& r) {
    nucleograde::RgbImage out = img;
    auto put = [&](int x, int y, nucleograde::Rgb c) {
        if (out.contains(x, y)) out(x, y) = c;
    };
    for (const auto& q : r.quarters) {
        for (const auto& n : q.nuclei)
            for (const auto& p : n.polygon) put(p[0], p[1], {255, 0, 0});
        for (const auto& s : q.seeds) {
            const int cx = static_cast<int>(std::lround(s.center.x));
            const int cy = static_cast<int>(std::lround(s.center.y));
            for (int d = -2; d <= 2; ++d) {
                put(cx + d, cy, {0, 255, 0});
                put(cx, cy + d, {0, 255, 0});
            }
        }
    }
    return out;
}

}  // namespace cli
