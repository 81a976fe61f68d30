#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace qgil {

// Minimal SHA-1, used only as a content fingerprint for emitted artifacts
// (not for anything security sensitive).
class Sha1 {
public:
    Sha1() = default;

    void update(std::string_view data) {
        for (unsigned char c : data) {
            block_[block_len_++] = c;
            ++total_len_;
            if (block_len_ == 64) {
                process_block();
                block_len_ = 0;
            }
        }
    }

    std::string hex_digest() {
        const std::uint64_t bit_len = total_len_ * 8;
        update("\x80");
        while (block_len_ != 56) update(std::string_view("\0", 1));
        for (int i = 7; i >= 0; --i) {
            const char b = static_cast<char>((bit_len >> (8 * i)) & 0xff);
            update(std::string_view(&b, 1));
        }
        static const char* kHex = "0123456789abcdef";
        std::string out;
        out.reserve(40);
        for (std::uint32_t word : h_) {
            for (int i = 28; i >= 0; i -= 4) out.push_back(kHex[(word >> i) & 0xf]);
        }
        return out;
    }

private:
    void process_block() {
        std::uint32_t w[80];
        for (int i = 0; i < 16; ++i) {
            w[i] = (std::uint32_t(block_[4 * i]) << 24) | (std::uint32_t(block_[4 * i + 1]) << 16) |
                   (std::uint32_t(block_[4 * i + 2]) << 8) | std::uint32_t(block_[4 * i + 3]);
        }
        auto rol = [](std::uint32_t x, int n) { return (x << n) | (x >> (32 - n)); };
        for (int i = 16; i < 80; ++i) w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);

        std::uint32_t a = h_[0], b = h_[1], c = h_[2], d = h_[3], e = h_[4];
        for (int i = 0; i < 80; ++i) {
            std::uint32_t f, k;
            if (i < 20) {
                f = (b & c) | (~b & d);
                k = 0x5a827999;
            } else if (i < 40) {
                f = b ^ c ^ d;
                k = 0x6ed9eba1;
            } else if (i < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8f1bbcdc;
            } else {
                f = b ^ c ^ d;
                k = 0xca62c1d6;
            }
            const std::uint32_t tmp = rol(a, 5) + f + e + k + w[i];
            e = d;
            d = c;
            c = rol(b, 30);
            b = a;
            a = tmp;
        }
        h_[0] += a;
        h_[1] += b;
        h_[2] += c;
        h_[3] += d;
        h_[4] += e;
    }

    std::array<std::uint32_t, 5> h_{0x67452301, 0xefcdab89, 0x98badcfe, 0x10325476, 0xc3d2e1f0};
    unsigned char block_[64] = {};
    std::size_t block_len_ = 0;
    std::uint64_t total_len_ = 0;
};

inline std::string sha1_hex(std::string_view data) {
    Sha1 h;
    h.update(data);
    return h.hex_digest();
}

// Git-style blob hash: sha1("blob <size>\0<content>").
inline std::string git_blob_sha1(std::string_view content) {
    Sha1 h;
    h.update("blob " + std::to_string(content.size()));
    h.update(std::string_view("\0", 1));
    h.update(content);
    return h.hex_digest();
}

}  // namespace qgil
