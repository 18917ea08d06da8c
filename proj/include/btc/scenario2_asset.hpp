#ifndef BTC_SCENARIO2_ASSET_HPP
#define BTC_SCENARIO2_ASSET_HPP

// Generated from assets/scenario2.tsrm; keep the two in sync.
// Rank-3 cross on a 48x48 grid: horizontal bar, vertical bar, and a
// negative overlap block so every cell is 0 or 1.

#include <string_view>

namespace btc {

inline constexpr std::string_view kScenario2Asset =
    "TSRM 1\n"
    "rank 3\n"
    "dims 48 48\n"
    "0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 1 1 1 1 1 1 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0\n"
    "0 0 0 0 0 0 0 0 0 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 0 0 0 0 0 0 0 0 0\n"
    "0 0 0 0 0 0 0 0 0 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 0 0 0 0 0 0 0 0 0\n"
    "0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 1 1 1 1 1 1 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0\n"
    "0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 1 1 1 1 1 1 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0\n"
    "0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 -1 -1 -1 -1 -1 -1 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0\n";

inline constexpr std::string_view kScenario2AssetSha256 =
    "be7ca05bda9f5b3bdee82dcbc0c4c6000e4aeadfc67bc5a6c09382f11924ad53";

}  // namespace btc

#endif  // BTC_SCENARIO2_ASSET_HPP
