#pragma once

#include <stdexcept>
#include <string>

namespace idrm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Roll-pitch-yaw requested for a rotation whose pitch is at +-pi/2.
class GimbalLockError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid robot description; `path()` names the offending field.
class RobotModelError : public Error {
 public:
  RobotModelError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Offline sampling made no progress (too many consecutive IK rejections).
class SamplingError : public Error {
 public:
  using Error::Error;
};

/// A map could not be built from the supplied samples and grid.
class BuildError : public Error {
 public:
  using Error::Error;
};

/// Map file problems. Each failure mode has its own code.
class MapFileError : public Error {
 public:
  enum class Code { kIo, kBadMagic, kVersionMismatch, kTruncated, kCorrupt, kDigestMismatch };

  MapFileError(Code code, const std::string& what) : Error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

class ScenarioError : public Error {
 public:
  using Error::Error;
};

}  // namespace idrm
