#pragma once

#define HFSLAM_VERSION_MAJOR 0
#define HFSLAM_VERSION_MINOR 1
#define HFSLAM_VERSION_PATCH 0
#define HFSLAM_VERSION_STRING "0.1.0"
