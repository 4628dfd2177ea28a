#pragma once

#define GWP_VERSION "0.1.0"
