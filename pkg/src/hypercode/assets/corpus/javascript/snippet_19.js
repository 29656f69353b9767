switch (process.env.NODE_ENV) {
  case "production":
    console.log("running optimized build");
    break;
  case "test":
    console.log("running under test harness");
    break;
  default:
    console.log("development mode");
}
