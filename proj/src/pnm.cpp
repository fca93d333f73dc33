#include "wbrt/pnm.hpp"

#include <cctype>

#include "wbrt/errors.hpp"

namespace wbrt {

std::string encode_pgm(const GrayImage& img)
{
    if (img.maxval < 1 || img.maxval > 65535) fail(ErrorKind::argument, "PGM maxval out of range");
    if (img.px.size() != static_cast<std::size_t>(img.cols) * img.rows)
        fail(ErrorKind::argument, "PGM pixel count does not match dimensions");
    const bool wide = img.maxval > 255;
    std::string out = "P5\n" + std::to_string(img.cols) + " " + std::to_string(img.rows) + "\n" +
                      std::to_string(img.maxval) + "\n";
    out.reserve(out.size() + img.px.size() * (wide ? 2 : 1));
    for (int r = img.rows - 1; r >= 0; --r)
        for (int c = 0; c < img.cols; ++c) {
            const std::uint16_t v = img.px[static_cast<std::size_t>(r) * img.cols + c];
            if (wide) out.push_back(static_cast<char>(v >> 8));
            out.push_back(static_cast<char>(v & 0xff));
        }
    return out;
}

GrayImage decode_pgm(const std::string& b)
{
    std::size_t pos = 0;
    auto skip = [&] {
        while (pos < b.size()) {
            if (std::isspace(static_cast<unsigned char>(b[pos]))) {
                ++pos;
            } else if (b[pos] == '#') {
                while (pos < b.size() && b[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    };
    auto number = [&] {
        skip();
        if (pos >= b.size() || !std::isdigit(static_cast<unsigned char>(b[pos])))
            fail(ErrorKind::format, "malformed PGM header");
        long v = 0;
        while (pos < b.size() && std::isdigit(static_cast<unsigned char>(b[pos]))) {
            v = v * 10 + (b[pos++] - '0');
            if (v > 1000000) fail(ErrorKind::format, "PGM header value too large");
        }
        return static_cast<int>(v);
    };
    if (b.size() < 2 || b[0] != 'P' || b[1] != '5') fail(ErrorKind::format, "not a binary PGM (P5)");
    pos = 2;
    GrayImage img;
    img.cols = number();
    img.rows = number();
    img.maxval = number();
    if (img.cols <= 0 || img.rows <= 0 || img.maxval <= 0 || img.maxval > 65535)
        fail(ErrorKind::format, "PGM header values out of range");
    if (pos >= b.size() || !std::isspace(static_cast<unsigned char>(b[pos])))
        fail(ErrorKind::format, "malformed PGM header");
    ++pos;
    const bool wide = img.maxval > 255;
    const std::size_t n = static_cast<std::size_t>(img.cols) * img.rows;
    if (b.size() - pos != n * (wide ? 2 : 1)) fail(ErrorKind::format, "PGM payload size does not match header");
    img.px.resize(n);
    for (int r = img.rows - 1; r >= 0; --r)
        for (int c = 0; c < img.cols; ++c) {
            std::uint16_t v = static_cast<unsigned char>(b[pos++]);
            if (wide) v = static_cast<std::uint16_t>((v << 8) | static_cast<unsigned char>(b[pos++]));
            img.px[static_cast<std::size_t>(r) * img.cols + c] = v;
        }
    return img;
}

std::string encode_ppm(int cols, int rows, const std::vector<std::uint8_t>& rgb)
{
    if (rgb.size() != static_cast<std::size_t>(cols) * rows * 3)
        fail(ErrorKind::argument, "PPM pixel count does not match dimensions");
    std::string out = "P6\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
    for (int r = rows - 1; r >= 0; --r)
        out.append(reinterpret_cast<const char*>(rgb.data()) + static_cast<std::size_t>(r) * cols * 3,
                   static_cast<std::size_t>(cols) * 3);
    return out;
}

}  // namespace wbrt
