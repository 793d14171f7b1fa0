#pragma once

#include <stdexcept>
#include <string>

namespace lossid {

// Exit codes used by the CLI. Library code throws the matching exception
// type; main() translates.
enum ExitCode {
    kExitOk = 0,
    kExitUsage = 2,       // bad flags, bad config, bad parameters
    kExitParse = 3,       // unreadable input file
    kExitSchema = 4,      // feature schema mismatch
    kExitDivergence = 5,  // numeric divergence during training
};

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration value, invalid hyperparameter, bad usage.
struct ConfigError : Error {
    using Error::Error;
};

// Malformed or unusable input data (trace files, dataset CSVs, model files).
struct ParseError : Error {
    using Error::Error;
};

// Model feature schema does not match the dataset's active features.
struct SchemaError : Error {
    using Error::Error;
};

// Non-finite loss while training.
struct DivergenceError : Error {
    using Error::Error;
};

}  // namespace lossid
