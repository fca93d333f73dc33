#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wbrt {

// Images here are stored bottom-up (row 0 = smallest v); encoders write the top row first.
struct GrayImage {
    int cols = 0;
    int rows = 0;
    int maxval = 255;
    std::vector<std::uint16_t> px;
};

std::string encode_pgm(const GrayImage& img);
GrayImage decode_pgm(const std::string& bytes);

// rgb holds 3 bytes per pixel, bottom-up.
std::string encode_ppm(int cols, int rows, const std::vector<std::uint8_t>& rgb);

}  // namespace wbrt
