#include "waveletvfi/config.hpp"

#include "waveletvfi/rng.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace wvfi {

void EngineConfig::validate() const {
    if (eta_candidates.empty()) {
        throw std::invalid_argument("EngineConfig: no eta candidates");
    }
    for (std::size_t i = 0; i < eta_candidates.size(); ++i) {
        if (eta_candidates[i] < 0.0f) {
            throw std::invalid_argument("EngineConfig: eta candidates must be >= 0");
        }
        if (i > 0 && eta_candidates[i] <= eta_candidates[i - 1]) {
            throw std::invalid_argument("EngineConfig: eta candidates must be strictly increasing");
        }
    }
    if (fixed_eta < 0.0f) {
        throw std::invalid_argument("EngineConfig: fixed eta must be >= 0");
    }
    if (!(temperature > 0.0f)) {
        throw std::invalid_argument("EngineConfig: temperature must be positive");
    }
    for (int w : mp_encoder_widths) {
        if (w <= 0) throw std::invalid_argument("EngineConfig: bad mp width");
    }
    for (int w : ws_encoder_widths) {
        if (w <= 0) throw std::invalid_argument("EngineConfig: bad ws width");
    }
    for (int w : ws_decoder_widths) {
        if (w <= 0) throw std::invalid_argument("EngineConfig: bad ws decoder width");
    }
}

std::vector<LayerDef> layer_plan(const EngineConfig& cfg) {
    std::vector<LayerDef> plan;
    auto conv = [&](std::string name, int out, int in, int stride, bool zero_init = false) {
        plan.push_back(LayerDef{std::move(name), LayerDef::Kind::kConv, out, in, 3, 3, stride, 1,
                                zero_init});
    };
    auto fc = [&](std::string name, int out, int in) {
        plan.push_back(LayerDef{std::move(name), LayerDef::Kind::kFc, out, in, 1, 1, 1, 0, false});
    };

    // motion pyramid encoder (shared between the two input frames)
    int prev = 3;
    for (int l = 0; l < 4; ++l) {
        const int w = cfg.mp_encoder_widths[l];
        conv("mp.enc.l" + std::to_string(l + 1) + ".conv0", w, prev, 2);
        conv("mp.enc.l" + std::to_string(l + 1) + ".conv1", w, w, 1);
        prev = w;
    }
    // coarse-to-fine motion decoders, 5-channel heads (4 flow + 1 occlusion)
    for (int l = 4; l >= 1; --l) {
        const int w = cfg.mp_encoder_widths[l - 1];
        const int in = (l == 4) ? 2 * w : 5 + 2 * w;
        const std::string base = "mp.dec.l" + std::to_string(l);
        conv(base + ".conv0", w, in, 1);
        conv(base + ".conv1", w, w, 1);
        conv(base + ".head", 5, w, 1, /*zero_init=*/true);
    }
    // threshold classifier branch off the second-last conv of decoder 4
    conv("mp.cls.conv", cfg.classifier_channels, cfg.mp_encoder_widths[3], 1);
    fc("mp.cls.fc0", cfg.classifier_hidden, cfg.classifier_channels);
    fc("mp.cls.fc1", cfg.num_candidates(), cfg.classifier_hidden);

    // synthesis context encoders
    prev = 3;
    for (int l = 0; l < 4; ++l) {
        conv("ws.enc1.l" + std::to_string(l + 1) + ".conv0", cfg.ws_encoder_widths[l], prev, 2);
        prev = cfg.ws_encoder_widths[l];
    }
    prev = 8; // flow(4) + occlusion(1) + merged frame(3)
    for (int l = 0; l < 4; ++l) {
        conv("ws.enc2.l" + std::to_string(l + 1) + ".conv0", cfg.ws_encoder_widths[l], prev, 2);
        prev = cfg.ws_encoder_widths[l];
    }
    // synthesis decoders; the level-4 head carries LL+LH+HL+HH (12ch), finer
    // heads carry LH+HL+HH (9ch)
    for (int l = 4; l >= 1; --l) {
        const int ctx = 3 * cfg.ws_encoder_widths[l - 1];
        const int in = (l == 4) ? ctx : ctx + cfg.ws_decoder_widths[l];
        const int w = cfg.ws_decoder_widths[l - 1];
        const std::string base = "ws.dec.l" + std::to_string(l);
        conv(base + ".feat", w, in, 1);
        conv(base + ".head", (l == 4) ? 12 : 9, w, 1);
    }
    return plan;
}

void NetworkWeights::put(Entry entry) {
    index[entry.name] = entries.size();
    entries.push_back(std::move(entry));
}

const NetworkWeights::Entry& NetworkWeights::at(const std::string& name) const {
    auto it = index.find(name);
    if (it == index.end()) {
        throw std::runtime_error("weights: missing entry '" + name + "'");
    }
    return entries[it->second];
}

ConvSpec NetworkWeights::conv(const std::string& prefix, int stride, int padding) const {
    const Entry& w = at(prefix + ".weight");
    const Entry& b = at(prefix + ".bias");
    if (w.dims.size() != 4) {
        throw std::runtime_error("weights: '" + prefix + ".weight' is not rank 4");
    }
    ConvSpec spec;
    spec.out_channels = static_cast<int>(w.dims[0]);
    spec.in_channels = static_cast<int>(w.dims[1]);
    spec.kh = static_cast<int>(w.dims[2]);
    spec.kw = static_cast<int>(w.dims[3]);
    spec.stride = stride;
    spec.padding = padding;
    spec.weights = w.data;
    spec.bias = b.data;
    spec.validate();
    return spec;
}

void NetworkWeights::validate_against(const EngineConfig& config) const {
    for (const LayerDef& layer : layer_plan(config)) {
        const Entry& w = at(layer.name + ".weight");
        const Entry& b = at(layer.name + ".bias");
        std::vector<std::uint32_t> want;
        if (layer.kind == LayerDef::Kind::kConv) {
            want = {static_cast<std::uint32_t>(layer.out_ch),
                    static_cast<std::uint32_t>(layer.in_ch),
                    static_cast<std::uint32_t>(layer.kh),
                    static_cast<std::uint32_t>(layer.kw)};
        } else {
            want = {static_cast<std::uint32_t>(layer.out_ch),
                    static_cast<std::uint32_t>(layer.in_ch)};
        }
        if (w.dims != want) {
            throw std::runtime_error("weights: '" + layer.name + ".weight' shape mismatch");
        }
        if (b.dims != std::vector<std::uint32_t>{static_cast<std::uint32_t>(layer.out_ch)}) {
            throw std::runtime_error("weights: '" + layer.name + ".bias' shape mismatch");
        }
    }
}

namespace {

// Haar pass-through layout inside the synthesis net: channels 0..2 of every
// reserved feature map carry the running per-level LL (RGB, nonnegative, so
// leaky-ReLU leaves it alone); channels 3..20 carry +-pairs of the three
// high-frequency bands per color. A pair (lrelu^k(x), lrelu^k(-x)) decodes
// back to x via (p - q) / (1 + 0.1^k).
constexpr int kReservedChannels = 21;

int pair_channel(int band, int color) { return 3 + 2 * (3 * band + color); }

struct KernelWriter {
    std::vector<float>& data;
    int in_ch, kh, kw;

    void zero_row(int o) {
        std::fill(data.begin() + static_cast<std::size_t>(o) * in_ch * kh * kw,
                  data.begin() + static_cast<std::size_t>(o + 1) * in_ch * kh * kw, 0.0f);
    }
    void scale_row(int o, float s) {
        const std::size_t start = static_cast<std::size_t>(o) * in_ch * kh * kw;
        for (std::size_t i = 0; i < static_cast<std::size_t>(in_ch) * kh * kw; ++i) {
            data[start + i] *= s;
        }
    }
    void zero_column(int o, int c) {
        for (int t = 0; t < kh * kw; ++t) {
            data[(static_cast<std::size_t>(o) * in_ch + c) * kh * kw + t] = 0.0f;
        }
    }
    float& at(int o, int c, int ky, int kx) {
        return data[((static_cast<std::size_t>(o) * in_ch + c) * kh + ky) * kw + kx];
    }
};

// 2x2 analysis kernels over taps (ky, kx) in {1, 2} of a stride-2 3x3 conv
// with padding 1, which lands exactly on the non-overlapping block convention
// of the wavelet module.
constexpr float kHaarKernels[4][2][2] = {
    {{0.5f, 0.5f}, {0.5f, 0.5f}},   // LL
    {{-0.5f, 0.5f}, {-0.5f, 0.5f}}, // LH (H along x)
    {{-0.5f, -0.5f}, {0.5f, 0.5f}}, // HL (H along y)
    {{0.5f, -0.5f}, {-0.5f, 0.5f}}, // HH
};

bool haar_init_applies(const EngineConfig& cfg) {
    for (int w : cfg.ws_encoder_widths) {
        if (w < kReservedChannels) return false;
    }
    for (int w : cfg.ws_decoder_widths) {
        if (w < kReservedChannels) return false;
    }
    return true;
}

// Analysis rows for one encoder level: LL and the +-band pairs of the source
// LL channels starting at src_ll.
void write_haar_rows(KernelWriter& w, int src_ll) {
    for (int c = 0; c < 3; ++c) {
        w.zero_row(c);
        for (int ky = 0; ky < 2; ++ky) {
            for (int kx = 0; kx < 2; ++kx) {
                w.at(c, src_ll + c, ky + 1, kx + 1) = kHaarKernels[0][ky][kx];
            }
        }
    }
    for (int band = 0; band < 3; ++band) {
        for (int c = 0; c < 3; ++c) {
            const int p = pair_channel(band, c);
            w.zero_row(p);
            w.zero_row(p + 1);
            for (int ky = 0; ky < 2; ++ky) {
                for (int kx = 0; kx < 2; ++kx) {
                    const float v = kHaarKernels[band + 1][ky][kx];
                    w.at(p, src_ll + c, ky + 1, kx + 1) = v;
                    w.at(p + 1, src_ll + c, ky + 1, kx + 1) = -v;
                }
            }
        }
    }
}

// Coefficient head rows: decode the pass-through pairs (two leaky-ReLUs deep
// by now) at the center tap, keep a small random residual on the remaining
// feature channels so untrained coefficients are tiny-but-nonzero away from
// image structure.
void write_head_band_rows(KernelWriter& w, int first_row, float noise) {
    constexpr float kPairDecode = 1.0f / 1.01f;
    for (int band = 0; band < 3; ++band) {
        for (int c = 0; c < 3; ++c) {
            const int o = first_row + 3 * band + c;
            w.scale_row(o, noise);
            for (int rc = 0; rc < kReservedChannels; ++rc) w.zero_column(o, rc);
            w.at(o, pair_channel(band, c), 1, 1) = kPairDecode;
            w.at(o, pair_channel(band, c) + 1, 1, 1) = -kPairDecode;
        }
    }
}

void apply_structured_init(const LayerDef& layer, const EngineConfig& cfg,
                           std::vector<float>& data) {
    if (!haar_init_applies(cfg)) return;
    const std::string& name = layer.name;
    KernelWriter w{data, layer.in_ch, layer.kh, layer.kw};

    if (name.rfind("ws.enc2.l", 0) == 0) {
        const int level = name[9] - '0';
        // level 1 reads the merged frame (input channels 5..7); deeper levels
        // read the previous level's LL copy
        write_haar_rows(w, level == 1 ? 5 : 0);
        return;
    }
    if (name.rfind("ws.dec.l", 0) == 0) {
        const int level = name[8] - '0';
        const int psi_off = 2 * cfg.ws_encoder_widths[level - 1];
        if (name.ends_with(".feat")) {
            // forward the reserved channels of psi^l through the feature conv
            for (int r = 0; r < kReservedChannels; ++r) {
                w.zero_row(r);
                w.at(r, psi_off + r, 1, 1) = 1.0f;
            }
            return;
        }
        if (name.ends_with(".head")) {
            int first_band_row = 0;
            if (level == 4) {
                // rows 0..2 reproduce LL^4 exactly
                for (int c = 0; c < 3; ++c) {
                    w.zero_row(c);
                    w.at(c, c, 1, 1) = 1.0f;
                }
                first_band_row = 3;
            }
            write_head_band_rows(w, first_band_row, cfg.head_init_noise);
            return;
        }
    }
}

} // namespace

NetworkWeights init_weights(const EngineConfig& config, std::uint64_t seed) {
    config.validate();
    NetworkWeights weights;
    SplitMix64 rng(seed);
    for (const LayerDef& layer : layer_plan(config)) {
        const int fan_in = layer.in_ch * layer.kh * layer.kw;
        const int fan_out = layer.out_ch * layer.kh * layer.kw;
        const float bound = std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));

        NetworkWeights::Entry w;
        w.name = layer.name + ".weight";
        if (layer.kind == LayerDef::Kind::kConv) {
            w.dims = {static_cast<std::uint32_t>(layer.out_ch),
                      static_cast<std::uint32_t>(layer.in_ch),
                      static_cast<std::uint32_t>(layer.kh),
                      static_cast<std::uint32_t>(layer.kw)};
        } else {
            w.dims = {static_cast<std::uint32_t>(layer.out_ch),
                      static_cast<std::uint32_t>(layer.in_ch)};
        }
        std::size_t n = 1;
        for (std::uint32_t d : w.dims) n *= d;
        w.data.resize(n);
        for (float& v : w.data) v = rng.uniform_float(-bound, bound);
        if (layer.zero_init) {
            std::fill(w.data.begin(), w.data.end(), 0.0f);
        } else if (layer.kind == LayerDef::Kind::kConv) {
            apply_structured_init(layer, config, w.data);
        }

        NetworkWeights::Entry b;
        b.name = layer.name + ".bias";
        b.dims = {static_cast<std::uint32_t>(layer.out_ch)};
        b.data.assign(layer.out_ch, 0.0f);

        weights.put(std::move(w));
        weights.put(std::move(b));
    }
    return weights;
}

namespace {

constexpr char kMagic[4] = {'W', 'V', 'F', 'I'};
constexpr std::uint32_t kVersion = 1;

void write_u16(std::ofstream& out, std::uint16_t v) {
    unsigned char buf[2] = {static_cast<unsigned char>(v & 0xff),
                            static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<const char*>(buf), 2);
}

void write_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 4);
}

struct Reader {
    std::ifstream in;
    std::size_t offset = 0;

    explicit Reader(const std::string& path) : in(path, std::ios::binary) {}

    void read(void* dst, std::size_t n, const char* what) {
        in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n) {
            throw std::runtime_error("weights: truncated " + std::string(what) + " at offset " +
                                     std::to_string(offset));
        }
        offset += n;
    }

    std::uint16_t u16(const char* what) {
        unsigned char b[2];
        read(b, 2, what);
        return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    }

    std::uint32_t u32(const char* what) {
        unsigned char b[4];
        read(b, 4, what);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }
};

} // namespace

// File layout: magic "WVFI", version u32, entry count u32, then per entry
// name length u16 + UTF-8 name, rank u8, each dim u32, raw little-endian f32.
void save_weights(const NetworkWeights& weights, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("weights: cannot open '" + path + "' for writing");
    }
    out.write(kMagic, 4);
    write_u32(out, kVersion);
    write_u32(out, static_cast<std::uint32_t>(weights.entries.size()));
    for (const NetworkWeights::Entry& e : weights.entries) {
        write_u16(out, static_cast<std::uint16_t>(e.name.size()));
        out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
        const unsigned char rank = static_cast<unsigned char>(e.dims.size());
        out.write(reinterpret_cast<const char*>(&rank), 1);
        std::size_t n = 1;
        for (std::uint32_t d : e.dims) {
            write_u32(out, d);
            n *= d;
        }
        if (n != e.data.size()) {
            throw std::runtime_error("weights: entry '" + e.name + "' dims/data mismatch");
        }
        static_assert(sizeof(float) == 4);
        out.write(reinterpret_cast<const char*>(e.data.data()),
                  static_cast<std::streamsize>(4 * e.data.size()));
    }
    if (!out) {
        throw std::runtime_error("weights: write to '" + path + "' failed");
    }
}

NetworkWeights load_weights(const std::string& path) {
    Reader r(path);
    if (!r.in) {
        throw std::runtime_error("weights: cannot open '" + path + "'");
    }
    char magic[4];
    r.read(magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("weights: bad magic at offset 0 in '" + path + "'");
    }
    const std::uint32_t version = r.u32("version");
    if (version != kVersion) {
        throw std::runtime_error("weights: unsupported version " + std::to_string(version) +
                                 " at offset 4");
    }
    const std::uint32_t count = r.u32("entry count");
    NetworkWeights weights;
    for (std::uint32_t i = 0; i < count; ++i) {
        NetworkWeights::Entry e;
        const std::uint16_t name_len = r.u16("name length");
        e.name.resize(name_len);
        r.read(e.name.data(), name_len, "name");
        unsigned char rank = 0;
        r.read(&rank, 1, "rank");
        std::size_t n = 1;
        e.dims.resize(rank);
        for (unsigned char d = 0; d < rank; ++d) {
            e.dims[d] = r.u32("dim");
            n *= e.dims[d];
        }
        if (n > (1u << 28)) {
            throw std::runtime_error("weights: entry '" + e.name + "' implausibly large");
        }
        e.data.resize(n);
        r.read(e.data.data(), 4 * n, "tensor data");
        weights.put(std::move(e));
    }
    return weights;
}

} // namespace wvfi
