#pragma once

#include <stdexcept>
#include <string>

namespace temt {

// Base of every error the library throws. `exit_code` is what the CLI maps it to.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 3; }
};

// Malformed input file. Carries the file and 1-based line when known.
class IngestionError : public Error {
   public:
    IngestionError(const std::string& file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

   private:
    std::string file_;
    std::size_t line_;
};

// Dangling entity or relation reference.
class ResolutionError : public Error {
   public:
    using Error::Error;
};

class ParseError : public Error {
   public:
    using Error::Error;
};

class ConfigError : public Error {
   public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

class ShapeError : public Error {
   public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

class SamplingError : public Error {
   public:
    using Error::Error;
};

class MissingEmbeddingError : public Error {
   public:
    MissingEmbeddingError(const std::string& key, const std::string& sentence)
        : Error("no embedding for key " + key + " (sentence: \"" + sentence + "\")"), key_(key) {}
    const std::string& key() const noexcept { return key_; }

   private:
    std::string key_;
};

class NumericError : public Error {
   public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

// Raised when a split cannot reach its targets. Reports what was achieved.
class SplitError : public Error {
   public:
    SplitError(const std::string& what, std::size_t valid_removed, std::size_t test_removed)
        : Error(what), valid_removed_(valid_removed), test_removed_(test_removed) {}
    std::size_t valid_removed() const noexcept { return valid_removed_; }
    std::size_t test_removed() const noexcept { return test_removed_; }

   private:
    std::size_t valid_removed_;
    std::size_t test_removed_;
};

}  // namespace temt
