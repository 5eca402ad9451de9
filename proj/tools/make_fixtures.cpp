// Regenerates the canonical price, PV, neighbour-load and feeder fixtures.
//
//   dsm-fixtures <output-dir>

#include "dsm/feeder.hpp"
#include "dsm/profiles.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: dsm-fixtures <output-dir>\n";
        return 1;
    }
    const std::filesystem::path dir = argv[1];
    std::filesystem::create_directories(dir);
    auto write = [&](const char* name, const std::string& text) {
        std::ofstream(dir / name, std::ios::binary) << text;
    };
    write("price_canonical.csv", dsm::write_series(dsm::canonical_price_profile().usd_per_kwh));
    write("pv_canonical.csv", dsm::write_series(dsm::canonical_pv_profile().kw));
    write("neighbors_canonical.csv", dsm::write_neighbor_loads(dsm::canonical_neighbor_loads()));
    write("feeder_canonical.json", dsm::feeder_to_json(dsm::FeederModel::canonical()));
    return 0;
}
