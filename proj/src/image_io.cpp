#include "waveletvfi/image_io.hpp"

#include <zlib.h>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace wvfi {

namespace {

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("image: cannot open '" + path + "'");
    }
    in.seekg(0, std::ios::end);
    const std::streamoff len = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<unsigned char> buf(static_cast<std::size_t>(len));
    in.read(reinterpret_cast<char*>(buf.data()), len);
    if (static_cast<std::streamoff>(in.gcount()) != len) {
        throw std::runtime_error("image: short read on '" + path + "'");
    }
    return buf;
}

std::uint32_t be32(const unsigned char* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

void put_be32(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v >> 24));
    out.push_back(static_cast<unsigned char>(v >> 16));
    out.push_back(static_cast<unsigned char>(v >> 8));
    out.push_back(static_cast<unsigned char>(v));
}

const unsigned char kPngSig[8] = {137, 80, 78, 71, 13, 10, 26, 10};

int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

Tensor decode_png(const std::vector<unsigned char>& file, const std::string& path) {
    if (file.size() < 8 || std::memcmp(file.data(), kPngSig, 8) != 0) {
        throw std::runtime_error("png: bad signature in '" + path + "'");
    }
    std::size_t pos = 8;
    std::uint32_t width = 0, height = 0;
    int bit_depth = 0, color_type = -1;
    std::vector<unsigned char> idat;
    bool saw_ihdr = false, saw_iend = false;

    while (pos + 8 <= file.size()) {
        const std::uint32_t len = be32(&file[pos]);
        if (pos + 12 + len > file.size()) {
            throw std::runtime_error("png: truncated chunk in '" + path + "'");
        }
        const char* type = reinterpret_cast<const char*>(&file[pos + 4]);
        const unsigned char* data = &file[pos + 8];
        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) throw std::runtime_error("png: bad IHDR in '" + path + "'");
            width = be32(data);
            height = be32(data + 4);
            bit_depth = data[8];
            color_type = data[9];
            if (data[12] != 0) {
                throw std::runtime_error("png: interlaced files unsupported: '" + path + "'");
            }
            saw_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), data, data + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            saw_iend = true;
            break;
        }
        pos += 12 + len;
    }
    if (!saw_ihdr || !saw_iend || idat.empty()) {
        throw std::runtime_error("png: missing chunks in '" + path + "'");
    }
    if (width == 0 || height == 0 || width > (1u << 20) || height > (1u << 20)) {
        throw std::runtime_error("png: bad dimensions in '" + path + "'");
    }
    if (bit_depth != 8 || (color_type != 0 && color_type != 2 && color_type != 6)) {
        throw std::runtime_error("png: only 8-bit gray/RGB/RGBA supported: '" + path + "'");
    }
    const int nch = (color_type == 0) ? 1 : (color_type == 2 ? 3 : 4);
    const std::size_t stride = static_cast<std::size_t>(width) * nch;
    std::vector<unsigned char> raw((stride + 1) * height);
    uLongf raw_len = static_cast<uLongf>(raw.size());
    const int zret = uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size()));
    if (zret != Z_OK || raw_len != raw.size()) {
        throw std::runtime_error("png: inflate failed on '" + path + "'");
    }

    std::vector<unsigned char> pixels(stride * height);
    for (std::uint32_t y = 0; y < height; ++y) {
        const unsigned char filter = raw[(stride + 1) * y];
        const unsigned char* src = &raw[(stride + 1) * y + 1];
        unsigned char* dst = &pixels[stride * y];
        const unsigned char* up = (y > 0) ? &pixels[stride * (y - 1)] : nullptr;
        for (std::size_t i = 0; i < stride; ++i) {
            const int left = (i >= static_cast<std::size_t>(nch)) ? dst[i - nch] : 0;
            const int above = up ? up[i] : 0;
            const int corner = (up && i >= static_cast<std::size_t>(nch)) ? up[i - nch] : 0;
            int v = src[i];
            switch (filter) {
                case 0: break;
                case 1: v += left; break;
                case 2: v += above; break;
                case 3: v += (left + above) / 2; break;
                case 4: v += paeth(left, above, corner); break;
                default:
                    throw std::runtime_error("png: unknown filter in '" + path + "'");
            }
            dst[i] = static_cast<unsigned char>(v & 0xff);
        }
    }

    Tensor out(3, static_cast<int>(height), static_cast<int>(width));
    for (std::uint32_t y = 0; y < height; ++y) {
        for (std::uint32_t x = 0; x < width; ++x) {
            const unsigned char* px = &pixels[stride * y + static_cast<std::size_t>(x) * nch];
            for (int c = 0; c < 3; ++c) {
                const unsigned char v = (nch == 1) ? px[0] : px[c];
                out.at(c, static_cast<int>(y), static_cast<int>(x)) =
                    static_cast<float>(v) / 255.0f;
            }
        }
    }
    return out;
}

Tensor decode_ppm(const std::vector<unsigned char>& file, const std::string& path) {
    std::size_t pos = 0;
    auto next_token = [&]() -> std::string {
        while (pos < file.size()) {
            if (file[pos] == '#') {
                while (pos < file.size() && file[pos] != '\n') ++pos;
            } else if (std::isspace(file[pos])) {
                ++pos;
            } else {
                break;
            }
        }
        std::string tok;
        while (pos < file.size() && !std::isspace(file[pos])) tok.push_back(file[pos++]);
        if (tok.empty()) {
            throw std::runtime_error("ppm: truncated header in '" + path + "'");
        }
        return tok;
    };
    if (next_token() != "P6") {
        throw std::runtime_error("ppm: not a binary P6 file: '" + path + "'");
    }
    const long w = std::stol(next_token());
    const long h = std::stol(next_token());
    const long maxval = std::stol(next_token());
    if (w <= 0 || h <= 0 || maxval != 255) {
        throw std::runtime_error("ppm: unsupported header in '" + path + "'");
    }
    ++pos; // single whitespace after maxval
    const std::size_t need = static_cast<std::size_t>(w) * h * 3;
    if (file.size() < pos + need) {
        throw std::runtime_error("ppm: truncated pixel data in '" + path + "'");
    }
    Tensor out(3, static_cast<int>(h), static_cast<int>(w));
    const unsigned char* px = &file[pos];
    for (long y = 0; y < h; ++y) {
        for (long x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                out.at(c, static_cast<int>(y), static_cast<int>(x)) =
                    static_cast<float>(px[(y * w + x) * 3 + c]) / 255.0f;
            }
        }
    }
    return out;
}

bool has_suffix(const std::string& s, const char* suffix) {
    const std::size_t n = std::strlen(suffix);
    if (s.size() < n) return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::tolower(s[s.size() - n + i]) != suffix[i]) return false;
    }
    return true;
}

unsigned char to_byte(float v) {
    const float scaled = std::floor(v * 255.0f + 0.5f); // round half up
    if (scaled <= 0.0f) return 0;
    if (scaled >= 255.0f) return 255;
    return static_cast<unsigned char>(scaled);
}

void encode_png(const Tensor& image, const std::string& path) {
    const std::uint32_t w = static_cast<std::uint32_t>(image.width);
    const std::uint32_t h = static_cast<std::uint32_t>(image.height);
    const std::size_t stride = static_cast<std::size_t>(w) * 3;
    std::vector<unsigned char> raw((stride + 1) * h);
    for (std::uint32_t y = 0; y < h; ++y) {
        raw[(stride + 1) * y] = 0; // no per-row filtering
        unsigned char* dst = &raw[(stride + 1) * y + 1];
        for (std::uint32_t x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                dst[static_cast<std::size_t>(x) * 3 + c] =
                    to_byte(image.at(c, static_cast<int>(y), static_cast<int>(x)));
            }
        }
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<unsigned char> compressed(bound);
    if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) !=
        Z_OK) {
        throw std::runtime_error("png: deflate failed for '" + path + "'");
    }
    compressed.resize(bound);

    std::vector<unsigned char> out;
    out.insert(out.end(), kPngSig, kPngSig + 8);
    auto chunk = [&](const char* type, const std::vector<unsigned char>& data) {
        put_be32(out, static_cast<std::uint32_t>(data.size()));
        const std::size_t start = out.size();
        out.insert(out.end(), type, type + 4);
        out.insert(out.end(), data.begin(), data.end());
        const uLong crc = crc32(crc32(0L, Z_NULL, 0), &out[start],
                                static_cast<uInt>(4 + data.size()));
        put_be32(out, static_cast<std::uint32_t>(crc));
    };
    std::vector<unsigned char> ihdr;
    put_be32(ihdr, w);
    put_be32(ihdr, h);
    ihdr.push_back(8); // bit depth
    ihdr.push_back(2); // truecolor
    ihdr.push_back(0); // compression
    ihdr.push_back(0); // filter method
    ihdr.push_back(0); // no interlace
    chunk("IHDR", ihdr);
    chunk("IDAT", compressed);
    chunk("IEND", {});

    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("image: cannot open '" + path + "' for writing");
    }
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) {
        throw std::runtime_error("image: write failed for '" + path + "'");
    }
}

void encode_ppm(const Tensor& image, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("image: cannot open '" + path + "' for writing");
    }
    f << "P6\n" << image.width << " " << image.height << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(image.width) * 3);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                row[static_cast<std::size_t>(x) * 3 + c] = to_byte(image.at(c, y, x));
            }
        }
        f.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size()));
    }
    if (!f) {
        throw std::runtime_error("image: write failed for '" + path + "'");
    }
}

} // namespace

Tensor load_image(const std::string& path) {
    const std::vector<unsigned char> file = read_file(path);
    if (file.size() >= 8 && std::memcmp(file.data(), kPngSig, 8) == 0) {
        return decode_png(file, path);
    }
    if (file.size() >= 2 && file[0] == 'P' && file[1] == '6') {
        return decode_ppm(file, path);
    }
    throw std::runtime_error("image: unsupported format in '" + path + "' (need PNG or P6 PPM)");
}

void save_image(const Tensor& image, const std::string& path) {
    if (image.channels != 3) {
        throw std::invalid_argument("save_image: expected a 3-channel tensor");
    }
    if (has_suffix(path, ".png")) {
        encode_png(image, path);
    } else if (has_suffix(path, ".ppm")) {
        encode_ppm(image, path);
    } else {
        throw std::invalid_argument("save_image: unsupported extension on '" + path + "'");
    }
}

} // namespace wvfi
